"""Throughput comparison of the kernel backends.

Times one application of the plain and relaxed operators on each available
backend (compiled extension, NumPy fallback) for a smooth test scenario.

Run as:  python -m broadwell4.benchmark [--grid N] [--repeats K]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from . import kernels
from .boundary import transport_family
from .fields import Field4, GridSpec
from .model import ModelParams, SpaceTimeBox
from .transport import apply_T, apply_T_sigma


def _scenario(n: int):
    params = ModelParams(c=1.0, S=1.0, theta=math.pi / 4)
    box = SpaceTimeBox(0.0, 1.0, 0.0, 1.0, 1.0)
    grid = GridSpec(n, n, n)

    def bump(cx, cy, amp):
        return lambda xi, eta: amp * np.exp(
            -((xi - cx) ** 2 + (eta - cy) ** 2) / (2 * 0.4**2)
        )

    data = transport_family(
        [bump(0.4, 0.5, 0.003), bump(0.6, 0.4, 0.002), bump(0.5, 0.6, 0.001), bump(0.3, 0.3, 0.002)],
        params,
        box,
    )
    funcs = [
        lambda t, x, y, k=k: 0.002 * (1 + 0.5 * np.sin(2 * x + k) * np.cos(2 * y) * np.cos(t))
        for k in range(4)
    ]
    M = Field4.from_function(funcs, grid, box)
    return params, box, data, M


def _time(fn, repeats: int) -> float:
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--grid", type=int, default=33, help="nodes per axis")
    parser.add_argument("--repeats", type=int, default=3, help="timing repeats")
    args = parser.parse_args(argv)

    params, box, data, M = _scenario(args.grid)
    sigma = params.two_cs
    rows = []
    for backend in kernels.available_backends():
        kernels.use_backend(backend)
        t_plain = _time(lambda: apply_T(M, data, params, box), args.repeats)
        t_sigma = _time(
            lambda: apply_T_sigma(M, sigma, data, params, box), args.repeats
        )
        rows.append((backend, t_plain, t_sigma))
    kernels.use_backend(
        "compiled" if "compiled" in kernels.available_backends() else "numpy"
    )

    n = args.grid
    print(f"grid {n}x{n}x{n}, best of {args.repeats}")
    print(f"{'backend':10s} {'apply_T [s]':>12s} {'apply_T_sigma [s]':>18s}")
    for backend, t_plain, t_sigma in rows:
        print(f"{backend:10s} {t_plain:12.4f} {t_sigma:18.4f}")
    if len(rows) == 2:
        by = {r[0]: r for r in rows}
        if "compiled" in by and "numpy" in by:
            print(
                f"speedup     {by['numpy'][1] / by['compiled'][1]:12.1f}x "
                f"{by['numpy'][2] / by['compiled'][2]:17.1f}x"
            )
    else:
        print("compiled backend not built; NumPy lane only")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
