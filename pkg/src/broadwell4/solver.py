"""Picard iteration of the transport operator to its fixed point.

The iteration M <- T(M) (or T^sigma(M)) starts from a guess that already
satisfies the initial and inflow conditions, so every iterate reproduces
the data exactly and only the interior relaxes.  The stopping criterion is
the sup-norm increment, which equals the operator residual of the previous
iterate; no relative criterion is used since densities are legitimately
tiny in the certified regime.  Convergence from an arbitrary start is not
a theorem; the report carries the measured contraction ratios instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .boundary import BoundaryData, check_compatibility, x_face_coord, y_face_coord
from .certify import BoundCertificate, certify
from .errors import ConvergenceError, DataError, GateError, NumericalError
from .fields import Field4, GridSpec, fd_partials, v_functional
from .model import ModelParams, SpaceTimeBox
from .transport import QuadratureSpec, apply_T, apply_T_sigma

_MODES = ("plain", "sigma")
_GUESSES = ("free_streaming", "data_shell")


@dataclass(frozen=True)
class SolveConfig:
    tol: float = 1e-10
    max_iter: int = 200
    mode: str = "plain"
    sigma: Optional[float] = None  # sigma mode only; defaults to 2cS
    force: bool = False
    positivity_tol: float = 1e-12
    unsafe_sigma: bool = False
    guess: str = "free_streaming"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.guess not in _GUESSES:
            raise ValueError(f"guess must be one of {_GUESSES}, got {self.guess!r}")


@dataclass
class IterationReport:
    residuals: list = field(default_factory=list)
    v_values: list = field(default_factory=list)
    min_values: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    mode: str = "plain"
    sigma: Optional[float] = None
    certificate: Optional[BoundCertificate] = None

    def contraction_ratios(self):
        r = self.residuals
        return [r[k + 1] / r[k] for k in range(len(r) - 1) if r[k] > 0]

    def log_text(self) -> str:
        lines = ["# iter residual v_functional min_value"]
        for k, (r, v, m) in enumerate(
            zip(self.residuals, self.v_values, self.min_values), start=1
        ):
            lines.append(f"{k} {r!r} {v!r} {m!r}")
        return "\n".join(lines) + "\n"


def initial_guess(
    data: BoundaryData,
    params: ModelParams,
    box: SpaceTimeBox,
    grid: GridSpec,
    check_compat: bool = True,
) -> Field4:
    """Free-streaming start: the operator with the collision term off.

    Satisfies the initial and inflow conditions exactly.
    """
    if check_compat:
        report = check_compatibility(data)
        if not report.passed:
            raise DataError("incompatible data:\n" + report.table())
    free = replace(params, S=0.0)
    zero = Field4.zeros(grid, box)
    return apply_T(zero, data, free, box, QuadratureSpec.default(free, box, grid)).field


def data_shell_guess(
    data: BoundaryData, params: ModelParams, box: SpaceTimeBox, grid: GridSpec
) -> Field4:
    """Zero interior with the data written onto the slice and inflow faces."""
    t_ax, x_ax, y_ax = grid.axes(box)
    vals = np.zeros((4, *grid.shape))
    for i in (1, 2, 3, 4):
        X, Y = np.meshgrid(x_ax, y_ax, indexing="ij")
        vals[i - 1, 0] = data.initial[i - 1](X, Y)
        ix = 0 if x_face_coord(i, box) == box.a1 else grid.nx - 1
        Tt, Yy = np.meshgrid(t_ax, y_ax, indexing="ij")
        vals[i - 1, :, ix, :] = data.x_inflow[i - 1](Tt, Yy)
        iy = 0 if y_face_coord(i, box) == box.a2 else grid.ny - 1
        Tt, Xx = np.meshgrid(t_ax, x_ax, indexing="ij")
        vals[i - 1, :, :, iy] = data.y_inflow[i - 1](Tt, Xx)
    return Field4(vals, grid, box)


def residual(
    M: Field4,
    data: BoundaryData,
    params: ModelParams,
    box: SpaceTimeBox,
    quad: Optional[QuadratureSpec] = None,
) -> float:
    """Fixed-point defect ||T(M) - M|| in the sup norm."""
    out = apply_T(M, data, params, box, quad)
    return float(np.abs(out.field.values - M.values).max())


def solve(
    data: BoundaryData,
    params: ModelParams,
    box: SpaceTimeBox,
    grid: GridSpec,
    quad: Optional[QuadratureSpec] = None,
    cfg: Optional[SolveConfig] = None,
    certificate: Optional[BoundCertificate] = None,
    check_compat: bool = True,
):
    """Iterate to the fixed point; returns (field, IterationReport).

    Refuses inadmissible certificates unless cfg.force: the certified
    window is where existence/uniqueness is guaranteed, but the condition
    is only sufficient, so a forced run may still converge.
    """
    cfg = cfg or SolveConfig()
    quad = quad or QuadratureSpec.default(params, box, grid)
    cert = certificate if certificate is not None else certify(params, box, data)
    if not cert.admissible and not cfg.force:
        raise GateError(
            f"certificate inadmissible (pq = {cert.pq:.6g} > 1/4); "
            "pass force=True to run anyway"
        )
    if check_compat:
        comp = check_compatibility(data)
        if not comp.passed:
            raise DataError("incompatible data:\n" + comp.table())

    sigma = None
    if cfg.mode == "sigma":
        sigma = cfg.sigma if cfg.sigma is not None else params.two_cs

        def step(F):
            return apply_T_sigma(
                F, sigma, data, params, box, quad, unsafe_sigma=cfg.unsafe_sigma
            ).field

    else:

        def step(F):
            return apply_T(F, data, params, box, quad).field

    if cfg.guess == "free_streaming":
        M = initial_guess(data, params, box, grid, check_compat=False)
    else:
        M = data_shell_guess(data, params, box, grid)

    report = IterationReport(mode=cfg.mode, sigma=sigma, certificate=cert)
    track_v = min(grid.nt, grid.nx, grid.ny) >= 3
    for _ in range(cfg.max_iter):
        new = step(M)
        if not np.all(np.isfinite(new.values)):
            raise NumericalError(
                f"NaN/Inf divergence at iteration {report.iterations + 1}"
            )
        res = float(np.abs(new.values - M.values).max())
        v = v_functional(new, fd_partials(new)) if track_v else math.nan
        report.residuals.append(res)
        report.v_values.append(v)
        report.min_values.append(new.min_value())
        report.iterations += 1
        M = new
        if res <= cfg.tol:
            report.converged = True
            break
    if not report.converged:
        raise ConvergenceError(
            f"no convergence after {cfg.max_iter} iterations "
            f"(last residual {report.residuals[-1]:.3e})",
            report=report,
        )
    if cfg.mode == "sigma" and M.min_value() < -cfg.positivity_tol:
        # the relaxed operator guarantees this for non-negative data
        raise NumericalError(
            f"sigma-mode output dips to {M.min_value():.3e} below "
            f"-positivity_tol; data is negative or a kernel is wrong"
        )
    return M, report
