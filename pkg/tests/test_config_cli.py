import copy
import json
import math
import os

import numpy as np
import pytest

import broadwell4 as bw
from broadwell4.cli import main
from broadwell4.config import parse_config
from broadwell4.errors import ConfigError
from broadwell4.expressions import compile_expression


def base_config(level=0.003, mode="plain", grid=9):
    const = {"kind": "constant", "value": level}
    return {
        "schema_version": 1,
        "model": {"c": 1.0, "S": 1.0, "theta": math.pi / 4},
        "box": {"a1": 0.0, "b1": 1.0, "a2": 0.0, "b2": 1.0, "t_end": 1.0},
        "grid": {"nt": grid, "nx": grid, "ny": grid},
        "solve": {"mode": mode},
        "certificate": {"sampling": 32},
        "data": {
            "initial": {k: dict(const) for k in ("N1", "N2", "N3", "N4")},
            "x_inflow": {k: dict(const) for k in ("N1", "N2", "N3", "N4")},
            "y_inflow": {k: dict(const) for k in ("N1", "N2", "N3", "N4")},
        },
    }


def write_config(tmp_path, cfg, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


class TestExpressions:
    def test_basic_grammar(self):
        f = compile_expression("0.5*sin(x) + cos(y)/2 - exp(-x*y)", ("x", "y"))
        x, y = 0.3, 0.7
        assert f(x, y) == pytest.approx(
            0.5 * math.sin(x) + math.cos(y) / 2 - math.exp(-x * y)
        )

    def test_vectorized(self):
        f = compile_expression("x + 2*y", ("x", "y"))
        out = f(np.array([1.0, 2.0]), np.array([10.0, 20.0]))
        assert np.allclose(out, [21.0, 42.0])

    def test_rejects_power(self):
        with pytest.raises(ConfigError):
            compile_expression("x**2", ("x", "y"))

    def test_rejects_unknown_function(self):
        with pytest.raises(ConfigError):
            compile_expression("tan(x)", ("x", "y"))

    def test_rejects_unknown_variable(self):
        with pytest.raises(ConfigError):
            compile_expression("x + z", ("x", "y"))

    def test_rejects_attribute_access(self):
        with pytest.raises(ConfigError):
            compile_expression("x.__class__", ("x", "y"))


class TestParseConfig:
    def test_valid(self, tmp_path):
        rc = parse_config(write_config(tmp_path, base_config()))
        assert rc.params.c == 1.0
        assert rc.grid.nt == 9
        assert rc.data.initial[0](0.5, 0.5) == 0.003
        # constants get exact zero derivative samplers
        dx, _ = rc.data.initial_partials(1)
        assert dx(0.5, 0.5) == 0.0

    def test_unknown_top_key(self, tmp_path):
        cfg = base_config()
        cfg["extra"] = 1
        with pytest.raises(ConfigError, match="unknown top-level"):
            parse_config(write_config(tmp_path, cfg))

    def test_unknown_nested_key(self, tmp_path):
        cfg = base_config()
        cfg["model"]["tehta"] = 0.7
        with pytest.raises(ConfigError, match="unknown keys"):
            parse_config(write_config(tmp_path, cfg))

    def test_schema_version_required(self, tmp_path):
        cfg = base_config()
        del cfg["schema_version"]
        with pytest.raises(ConfigError, match="schema_version"):
            parse_config(write_config(tmp_path, cfg))

    def test_invalid_model_value(self, tmp_path):
        cfg = base_config()
        cfg["model"]["theta"] = 0.0
        with pytest.raises(ConfigError):
            parse_config(write_config(tmp_path, cfg))

    def test_expression_data(self, tmp_path):
        cfg = base_config()
        cfg["data"]["initial"]["N1"] = {
            "kind": "expression",
            "value": "0.001*(2 + sin(x)*cos(y))",
        }
        rc = parse_config(write_config(tmp_path, cfg))
        assert rc.data.initial[0](0.2, 0.4) == pytest.approx(
            0.001 * (2 + math.sin(0.2) * math.cos(0.4))
        )

    def test_expression_wrong_variable_for_group(self, tmp_path):
        cfg = base_config()
        # x_inflow samplers live on (t, y); x is not in scope
        cfg["data"]["x_inflow"]["N1"] = {"kind": "expression", "value": "x"}
        with pytest.raises(ConfigError, match="unknown variable"):
            parse_config(write_config(tmp_path, cfg))

    def test_table_data(self, tmp_path):
        xs = np.linspace(0, 1, 5)
        ys = np.linspace(0, 1, 4)
        rows = ["x,y,value"]
        for x in xs:
            for y in ys:
                rows.append(f"{x},{y},{0.01 * (x + 2 * y)}")
        (tmp_path / "grid.csv").write_text("\n".join(rows))
        cfg = base_config()
        cfg["data"]["initial"]["N1"] = {"kind": "table", "path": "grid.csv"}
        rc = parse_config(write_config(tmp_path, cfg))
        # bilinear interpolation reproduces the affine table exactly
        assert rc.data.initial[0](0.37, 0.81) == pytest.approx(0.01 * (0.37 + 1.62))

    def test_table_not_lattice(self, tmp_path):
        (tmp_path / "bad.csv").write_text("x,y,value\n0,0,1\n1,1,2\n")
        cfg = base_config()
        cfg["data"]["initial"]["N1"] = {"kind": "table", "path": "bad.csv"}
        with pytest.raises(ConfigError, match="lattice"):
            parse_config(write_config(tmp_path, cfg))

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="not found"):
            parse_config("/nonexistent/run.json")


class TestCli:
    def test_certify_admissible(self, tmp_path, capsys):
        path = write_config(tmp_path, base_config(0.003))
        code = main(["certify", "--config", path, "--out", str(tmp_path / "out")])
        assert code == 0
        cert = json.loads((tmp_path / "out" / "certificate.json").read_text())
        assert cert["admissible"] is True
        assert cert["pq"] == pytest.approx(0.23879393923934, rel=1e-12)

    def test_certify_inadmissible(self, tmp_path):
        path = write_config(tmp_path, base_config(0.1))
        assert main(["certify", "--config", path, "--out", str(tmp_path)]) == 2

    def test_malformed_config(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["certify", "--config", str(bad), "--out", str(tmp_path)]) == 64

    def test_compat_pass_and_fail(self, tmp_path):
        path = write_config(tmp_path, base_config())
        assert main(["compat", "--config", path]) == 0
        cfg = base_config()
        cfg["data"]["initial"]["N1"] = {"kind": "constant", "value": 1.0}
        path2 = write_config(tmp_path, cfg, "bad.json")
        assert main(["compat", "--config", path2]) == 4

    def test_solve_roundtrip(self, tmp_path):
        path = write_config(tmp_path, base_config(0.003))
        out = tmp_path / "out"
        code = main(
            ["solve", "--config", path, "--out", str(out), "--snapshots", "0,8",
             "--threads", "1"]
        )
        assert code == 0
        assert (out / "solution_t0000.csv").exists()
        assert (out / "solution_t0008.csv").exists()
        assert (out / "iterations.log").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["converged"] is True
        assert summary["iterations"] >= 1

    def test_solve_deterministic_rerun(self, tmp_path):
        path = write_config(tmp_path, base_config(0.003))
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert (
                main(
                    ["solve", "--config", path, "--out", str(out), "--threads", "1"]
                )
                == 0
            )
            outs.append((out / "solution_t0008.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_solve_gate_and_force(self, tmp_path):
        cfg = base_config(0.2)
        cfg["data"]["initial"]["N2"] = {"kind": "constant", "value": 0.1}
        cfg["data"]["x_inflow"]["N2"] = {"kind": "constant", "value": 0.1}
        cfg["data"]["y_inflow"]["N2"] = {"kind": "constant", "value": 0.1}
        for grp in ("initial", "x_inflow", "y_inflow"):
            cfg["data"][grp]["N3"] = {"kind": "constant", "value": 0.4}
        path = write_config(tmp_path, cfg)
        assert main(["solve", "--config", path, "--out", str(tmp_path / "o1")]) == 2
        assert (
            main(["solve", "--config", path, "--out", str(tmp_path / "o2"), "--force"])
            == 0
        )

    def test_solve_incompatible(self, tmp_path):
        cfg = base_config()
        cfg["data"]["initial"]["N1"] = {"kind": "constant", "value": 1.0}
        path = write_config(tmp_path, cfg)
        assert main(["solve", "--config", path, "--out", str(tmp_path / "out")]) == 4

    def test_solve_nonconverged(self, tmp_path):
        cfg = base_config(0.05)
        for grp in ("initial", "x_inflow", "y_inflow"):
            cfg["data"][grp]["N2"] = {"kind": "constant", "value": 0.02}
        cfg["solve"]["max_iter"] = 2
        cfg["solve"]["tol"] = 1e-15
        path = write_config(tmp_path, cfg)
        code = main(
            ["solve", "--config", path, "--out", str(tmp_path / "out"), "--force"]
        )
        assert code == 3

    def test_verify_pass_and_threshold_breach(self, tmp_path):
        cfg = base_config(0.003, grid=9)
        cfg["verify"] = {"threshold": 1e-2}
        path = write_config(tmp_path, cfg)
        out = tmp_path / "v1"
        assert main(["verify", "--config", path, "--out", str(out)]) == 0
        payload = json.loads((out / "comparison.json").read_text())
        assert payload["pass"] is True
        cfg["verify"] = {"threshold": 1e-18}
        cfg["data"]["initial"]["N1"] = {
            "kind": "expression",
            "value": "0.003 + 0.0001*sin(x)*sin(y)",
        }
        # keep the corners compatible: the faces see the same function
        cfg["data"]["x_inflow"]["N1"] = {
            "kind": "expression",
            "value": "0.003 + 0.0001*sin(0 - 0.7071067811865476*t)*sin(y - 0.7071067811865476*t)",
        }
        cfg["data"]["y_inflow"]["N1"] = {
            "kind": "expression",
            "value": "0.003 + 0.0001*sin(x - 0.7071067811865476*t)*sin(0 - 0.7071067811865476*t)",
        }
        path2 = write_config(tmp_path, cfg, "tight.json")
        assert main(["verify", "--config", path2, "--out", str(tmp_path / "v2")]) == 5

    def test_bad_snapshot_index(self, tmp_path):
        path = write_config(tmp_path, base_config())
        assert (
            main(
                ["solve", "--config", path, "--out", str(tmp_path), "--snapshots", "99"]
            )
            == 64
        )

    def test_usage_error(self):
        assert main(["certify"]) == 64
