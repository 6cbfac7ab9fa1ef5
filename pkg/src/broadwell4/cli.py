"""Command-line front end: certify | solve | verify | compat.

Exit codes are a total map of run outcomes:
  0  success (certified admissible / converged / matched / compatible)
  2  inadmissible certificate (without --force for solve)
  3  solver did not converge (or diverged numerically)
  4  incompatible data
  5  solver/oracle mismatch above the verify threshold
  64 malformed configuration or command line
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import kernels
from .boundary import check_compatibility
from .certify import certify
from .config import RunConfig, parse_config
from .errors import (
    BroadwellError,
    ConfigError,
    ConvergenceError,
    DataError,
    GateError,
    NumericalError,
)
from .fields import write_snapshot_csv
from .oracle import UpwindConfig, compare, upwind_solve
from .solver import solve

EXIT_OK = 0
EXIT_INADMISSIBLE = 2
EXIT_NOT_CONVERGED = 3
EXIT_INCOMPATIBLE = 4
EXIT_MISMATCH = 5
EXIT_CONFIG = 64


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load(args) -> RunConfig:
    rc = parse_config(args.config)
    if args.threads is not None:
        if args.threads < 1:
            raise ConfigError("--threads must be >= 1")
        kernels.set_num_threads(args.threads)
    return rc


def cmd_certify(args) -> int:
    rc = _load(args)
    cert = certify(rc.params, rc.box, rc.data, rc.c1_sampling)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "certificate.json")
    _write_json(path, cert.to_dict())
    print(f"certificate written to {path}")
    print(f"p={cert.p!r} q={cert.q!r} pq={cert.pq!r} admissible={cert.admissible}")
    return EXIT_OK if cert.admissible else EXIT_INADMISSIBLE


def cmd_compat(args) -> int:
    rc = _load(args)
    report = check_compatibility(rc.data, rc.compat_samples, rc.compat_tol)
    print(report.table())
    return EXIT_OK if report.passed else EXIT_INCOMPATIBLE


def _parse_snapshots(spec: str, nt: int):
    if spec is None:
        return [nt - 1]
    try:
        indices = [int(tok) for tok in spec.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"--snapshots must be comma-separated integers: {exc}")
    for k in indices:
        if not 0 <= k < nt:
            raise ConfigError(f"snapshot index {k} outside 0..{nt - 1}")
    return indices


def cmd_solve(args) -> int:
    rc = _load(args)
    snapshots = _parse_snapshots(args.snapshots, rc.grid.nt)
    report_comp = check_compatibility(rc.data, rc.compat_samples, rc.compat_tol)
    if not report_comp.passed:
        print(report_comp.table(), file=sys.stderr)
        return EXIT_INCOMPATIBLE
    cert = certify(rc.params, rc.box, rc.data, rc.c1_sampling)
    cfg = rc.solve_cfg
    if args.force:
        from dataclasses import replace

        cfg = replace(cfg, force=True)
    try:
        field, report = solve(
            rc.data,
            rc.params,
            rc.box,
            rc.grid,
            rc.quad,
            cfg,
            certificate=cert,
            check_compat=False,
        )
    except GateError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except (ConvergenceError, NumericalError) as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED

    os.makedirs(args.out, exist_ok=True)
    for k in snapshots:
        write_snapshot_csv(field, k, os.path.join(args.out, f"solution_t{k:04d}.csv"))
    with open(os.path.join(args.out, "iterations.log"), "w", encoding="utf-8") as fh:
        fh.write(report.log_text())
    _write_json(os.path.join(args.out, "certificate.json"), cert.to_dict())
    summary = {
        "converged": report.converged,
        "iterations": report.iterations,
        "final_residual": report.residuals[-1],
        "min_value": report.min_values[-1],
        "mode": report.mode,
        "sigma": report.sigma,
        "grid": list(rc.grid.shape),
        "snapshots": snapshots,
        "certificate": cert.to_dict(),
    }
    _write_json(os.path.join(args.out, "summary.json"), summary)
    print(
        f"converged in {report.iterations} iterations, "
        f"residual {report.residuals[-1]:.3e}, min value {report.min_values[-1]:.3e}"
    )
    return EXIT_OK


def cmd_verify(args) -> int:
    rc = _load(args)
    report_comp = check_compatibility(rc.data, rc.compat_samples, rc.compat_tol)
    if not report_comp.passed:
        print(report_comp.table(), file=sys.stderr)
        return EXIT_INCOMPATIBLE
    cert = certify(rc.params, rc.box, rc.data, rc.c1_sampling)
    try:
        field, _ = solve(
            rc.data,
            rc.params,
            rc.box,
            rc.grid,
            rc.quad,
            rc.solve_cfg,
            certificate=cert,
            check_compat=False,
        )
    except GateError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except (ConvergenceError, NumericalError) as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    reference = upwind_solve(rc.data, rc.params, rc.box, rc.grid, UpwindConfig(cfl=rc.verify_cfl))
    rep = compare(field, reference)
    os.makedirs(args.out, exist_ok=True)
    payload = rep.to_dict()
    payload["threshold"] = rc.verify_threshold
    payload["pass"] = rep.sup_diff <= rc.verify_threshold
    _write_json(os.path.join(args.out, "comparison.json"), payload)
    print(
        f"sup difference {rep.sup_diff:.6e} vs threshold {rc.verify_threshold:.6e}: "
        f"{'PASS' if payload['pass'] else 'FAIL'}"
    )
    return EXIT_OK if payload["pass"] else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="broadwell4",
        description="Planar four-velocity kinetic gas: characteristic fixed-point "
        "solver, bound certifier and finite-difference cross-check.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, extra in (
        ("certify", cmd_certify, ()),
        ("solve", cmd_solve, ("force", "snapshots")),
        ("verify", cmd_verify, ()),
        ("compat", cmd_compat, ()),
    ):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--threads", type=int, default=None, help="cap kernel workers")
        if "force" in extra:
            p.add_argument(
                "--force",
                action="store_true",
                help="run even when the certificate is inadmissible",
            )
        if "snapshots" in extra:
            p.add_argument(
                "--snapshots",
                default=None,
                help="comma-separated time indices to export (default: last)",
            )
        p.set_defaults(handler=fn)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_INCOMPATIBLE
    except BroadwellError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
