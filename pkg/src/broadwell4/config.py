"""Run-configuration parsing: JSON schema, data-function specifications.

The configuration is strict: a schema_version field is required and unknown
keys are rejected at every level, because a silently ignored typo in theta
or S would invalidate every certified constant downstream.

Data functions come in three kinds:

* constant: {"kind": "constant", "value": 0.003}
* expression: {"kind": "expression", "value": "0.003*exp(-x*y)"} over the
  closed grammar (+, -, *, /, sin, cos, exp, numbers, the function's own
  two variables)
* table: {"kind": "table", "path": "grid.csv"} — CSV with a header naming
  the two variables and "value", one row per node of a full rectangular
  lattice, interpolated bilinearly.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .boundary import BoundaryData
from .certify import DEFAULT_C1_SAMPLING
from .errors import ConfigError
from .expressions import compile_expression
from .fields import GridSpec
from .model import ModelParams, SpaceTimeBox
from .solver import SolveConfig
from .transport import QuadratureSpec

SCHEMA_VERSION = 1

_SPECIES_KEYS = ("N1", "N2", "N3", "N4")
_GROUP_VARS = {"initial": ("x", "y"), "x_inflow": ("t", "y"), "y_inflow": ("t", "x")}


def _section(cfg: dict, name: str, allowed: tuple, required: tuple = ()) -> dict:
    sec = cfg.get(name, {})
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be an object")
    unknown = set(sec) - set(allowed)
    if unknown:
        raise ConfigError(
            f"unknown keys in {name!r}: {sorted(unknown)}; allowed: {sorted(allowed)}"
        )
    missing = set(required) - set(sec)
    if missing:
        raise ConfigError(f"missing keys in {name!r}: {sorted(missing)}")
    return sec


def _number(sec: dict, key: str, default=None):
    val = sec.get(key, default)
    if val is None:
        return None
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{key!r} must be a number, got {val!r}")
    return float(val)


@dataclass
class RunConfig:
    params: ModelParams
    box: SpaceTimeBox
    grid: GridSpec
    quad: Optional[QuadratureSpec]
    solve_cfg: SolveConfig
    data: BoundaryData
    c1_sampling: int
    compat_samples: int
    compat_tol: float
    verify_threshold: float
    verify_cfl: float


def _table_sampler(path: str, variables: tuple):
    if not os.path.exists(path):
        raise ConfigError(f"table file not found: {path}")
    try:
        arr = np.genfromtxt(path, delimiter=",", names=True)
    except Exception as exc:
        raise ConfigError(f"cannot read table {path}: {exc}") from exc
    expected = (*variables, "value")
    if arr.dtype.names != expected:
        raise ConfigError(
            f"table {path} must have columns {','.join(expected)}, "
            f"got {arr.dtype.names}"
        )
    a_raw, b_raw, v_raw = (np.asarray(arr[n], float) for n in expected)
    a_ax = np.unique(a_raw)
    b_ax = np.unique(b_raw)
    if len(a_ax) < 2 or len(b_ax) < 2 or len(a_ax) * len(b_ax) != v_raw.size:
        raise ConfigError(f"table {path} is not a full rectangular lattice")
    values = np.full((len(a_ax), len(b_ax)), np.nan)
    ia = np.searchsorted(a_ax, a_raw)
    ib = np.searchsorted(b_ax, b_raw)
    values[ia, ib] = v_raw
    if np.isnan(values).any():
        raise ConfigError(f"table {path} has duplicate or missing lattice nodes")

    def sampler(a, b):
        a = np.clip(np.asarray(a, float), a_ax[0], a_ax[-1])
        b = np.clip(np.asarray(b, float), b_ax[0], b_ax[-1])
        ja = np.clip(np.searchsorted(a_ax, a, side="right") - 1, 0, len(a_ax) - 2)
        jb = np.clip(np.searchsorted(b_ax, b, side="right") - 1, 0, len(b_ax) - 2)
        wa = (a - a_ax[ja]) / (a_ax[ja + 1] - a_ax[ja])
        wb = (b - b_ax[jb]) / (b_ax[jb + 1] - b_ax[jb])
        return (
            values[ja, jb] * (1 - wa) * (1 - wb)
            + values[ja + 1, jb] * wa * (1 - wb)
            + values[ja, jb + 1] * (1 - wa) * wb
            + values[ja + 1, jb + 1] * wa * wb
        )

    return sampler


def _zero_sampler(a, b):
    return 0.0 * (np.asarray(a, float) + np.asarray(b, float))


def _function_spec(spec, variables, base_dir, name):
    if not isinstance(spec, dict):
        raise ConfigError(f"data entry {name} must be an object")
    unknown = set(spec) - {"kind", "value", "path"}
    if unknown:
        raise ConfigError(f"unknown keys in data entry {name}: {sorted(unknown)}")
    kind = spec.get("kind")
    if kind == "constant":
        value = _number(spec, "value")
        if value is None or value < 0:
            raise ConfigError(f"{name}: constant data needs a value >= 0")
        return (lambda a, b, _v=value: _v + 0.0 * (np.asarray(a, float) + np.asarray(b, float))), True
    if kind == "expression":
        text = spec.get("value")
        if not isinstance(text, str):
            raise ConfigError(f"{name}: expression data needs a string value")
        return compile_expression(text, variables), False
    if kind == "table":
        rel = spec.get("path")
        if not isinstance(rel, str):
            raise ConfigError(f"{name}: table data needs a path")
        return _table_sampler(os.path.join(base_dir, rel), variables), False
    raise ConfigError(
        f"{name}: kind must be constant, expression or table, got {kind!r}"
    )


def _parse_data(cfg: dict, box: SpaceTimeBox, base_dir: str) -> BoundaryData:
    data_sec = _section(
        cfg, "data", tuple(_GROUP_VARS), required=tuple(_GROUP_VARS)
    )
    groups = {}
    constant_flags = {}
    for group, variables in _GROUP_VARS.items():
        entries = _section(data_sec, group, _SPECIES_KEYS, required=_SPECIES_KEYS)
        samplers, flags = [], []
        for key in _SPECIES_KEYS:
            fn, is_const = _function_spec(
                entries[key], variables, base_dir, f"{group}.{key}"
            )
            samplers.append(fn)
            flags.append(is_const)
        groups[group] = tuple(samplers)
        constant_flags[group] = flags
    # constants carry exact zero derivatives; others use the FD fallback
    kwargs = {}
    for group, (da, db) in (
        ("initial", ("initial_dx", "initial_dy")),
        ("x_inflow", ("x_inflow_dt", "x_inflow_dy")),
        ("y_inflow", ("y_inflow_dt", "y_inflow_dx")),
    ):
        flags = constant_flags[group]
        if any(flags):
            derivs = tuple(_zero_sampler if f else None for f in flags)
            kwargs[da] = derivs
            kwargs[db] = derivs
    return BoundaryData(
        box=box,
        initial=groups["initial"],
        x_inflow=groups["x_inflow"],
        y_inflow=groups["y_inflow"],
        label="config",
        **kwargs,
    )


def parse_config(source, base_dir: Optional[str] = None) -> RunConfig:
    """Build a RunConfig from a JSON file path or an already-parsed dict."""
    if isinstance(source, (str, os.PathLike)):
        base_dir = base_dir if base_dir is not None else os.path.dirname(
            os.path.abspath(source)
        )
        try:
            with open(source, "r", encoding="utf-8") as fh:
                cfg = json.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {source}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    else:
        cfg = source
        base_dir = base_dir if base_dir is not None else "."
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")

    top_allowed = (
        "schema_version",
        "model",
        "box",
        "grid",
        "quadrature",
        "solve",
        "certificate",
        "compat",
        "verify",
        "data",
    )
    unknown = set(cfg) - set(top_allowed)
    if unknown:
        raise ConfigError(f"unknown top-level keys: {sorted(unknown)}")
    if cfg.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(
            f"schema_version must be {SCHEMA_VERSION}, got {cfg.get('schema_version')!r}"
        )

    try:
        model_sec = _section(cfg, "model", ("c", "S", "theta"), ("c", "S", "theta"))
        params = ModelParams(
            c=_number(model_sec, "c"),
            S=_number(model_sec, "S"),
            theta=_number(model_sec, "theta"),
        )
        box_sec = _section(
            cfg, "box", ("a1", "b1", "a2", "b2", "t_end"), ("a1", "b1", "a2", "b2", "t_end")
        )
        box = SpaceTimeBox(**{k: _number(box_sec, k) for k in box_sec})
        grid_sec = _section(cfg, "grid", ("nt", "nx", "ny"), ("nt", "nx", "ny"))
        for k in ("nt", "nx", "ny"):
            if not isinstance(grid_sec[k], int):
                raise ConfigError(f"grid.{k} must be an integer")
        grid = GridSpec(**grid_sec)

        quad_sec = _section(cfg, "quadrature", ("max_step",))
        max_step = _number(quad_sec, "max_step")
        quad = QuadratureSpec(max_step) if max_step is not None else None

        solve_sec = _section(
            cfg,
            "solve",
            ("tol", "max_iter", "mode", "sigma", "positivity_tol", "unsafe_sigma", "guess"),
        )
        if "max_iter" in solve_sec and not isinstance(solve_sec["max_iter"], int):
            raise ConfigError("solve.max_iter must be an integer")
        solve_cfg = SolveConfig(
            tol=_number(solve_sec, "tol", 1e-10),
            max_iter=solve_sec.get("max_iter", 200),
            mode=solve_sec.get("mode", "plain"),
            sigma=_number(solve_sec, "sigma"),
            positivity_tol=_number(solve_sec, "positivity_tol", 1e-12),
            unsafe_sigma=bool(solve_sec.get("unsafe_sigma", False)),
            guess=solve_sec.get("guess", "free_streaming"),
        )

        cert_sec = _section(cfg, "certificate", ("sampling",))
        sampling = cert_sec.get("sampling", DEFAULT_C1_SAMPLING)
        if not isinstance(sampling, int) or sampling < 2:
            raise ConfigError("certificate.sampling must be an integer >= 2")

        compat_sec = _section(cfg, "compat", ("n_samples", "tol"))
        compat_samples = compat_sec.get("n_samples", 65)
        if not isinstance(compat_samples, int) or compat_samples < 2:
            raise ConfigError("compat.n_samples must be an integer >= 2")
        compat_tol = _number(compat_sec, "tol", 1e-9)

        verify_sec = _section(cfg, "verify", ("threshold", "cfl"))
        verify_threshold = _number(verify_sec, "threshold", 1e-2)
        verify_cfl = _number(verify_sec, "cfl", 0.9)

        data = _parse_data(cfg, box, base_dir)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    return RunConfig(
        params=params,
        box=box,
        grid=grid,
        quad=quad,
        solve_cfg=solve_cfg,
        data=data,
        c1_sampling=sampling,
        compat_samples=compat_samples,
        compat_tol=compat_tol,
        verify_threshold=verify_threshold,
        verify_cfl=verify_cfl,
    )
