"""The characteristic-integral transport operator and its variants.

Applied to a candidate field M, the operator solves the linear system with
frozen source Q(M) by integrating along each species' backward
characteristic:

    (T_i M)(t,x,y) = trace_i(foot) + sign_i * integral_0^smax Q(M)(path(s)) ds.

Fixed points of T solve the nonlinear problem.  The relaxed variant T^sigma
adds sigma * rho * N_i to both sides, which turns into exponential
integrating factors along the characteristic and makes the output manifestly
non-negative for non-negative data once sigma >= 2cS.  The derivative
variant evaluates the closed-form first partials of T_i(M) (chain rule of
the region-wise formulas), used to track the C1-type functional.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import kernels
from .boundary import BoundaryData
from .errors import DataError
from .fields import Field4, FieldPartials, GridSpec
from .geometry import Region, grid_regions, trace_arrays
from .model import COLLISION_SIGNS, ModelParams, SpaceTimeBox, velocity_of


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite-trapezoid step cap along characteristics.

    The actual step is s_max / ceil(s_max / max_step), so the foot and the
    evaluation point are always quadrature nodes.
    """

    max_step: float
    rule: str = "trapezoid"

    def __post_init__(self):
        if not self.max_step > 0:
            raise ValueError(f"max_step must be positive, got {self.max_step}")
        if self.rule != "trapezoid":
            raise ValueError(f"unsupported quadrature rule {self.rule!r}")

    @classmethod
    def default(
        cls, params: ModelParams, box: SpaceTimeBox, grid: GridSpec
    ) -> "QuadratureSpec":
        """min(dt, dx/c, dy/c): matches the order of the interpolation."""
        ht, hx, hy = grid.steps(box)
        return cls(min(ht, hx / params.c, hy / params.c))


@dataclass(frozen=True)
class OperatorOutput:
    field: Field4
    partials: Optional[FieldPartials]
    provenance: str  # "transport" | "sigma" | "transport+derivatives"


def _check_inputs(M: Field4, data: BoundaryData, box: SpaceTimeBox):
    if M.box != box:
        raise ValueError("field box does not match the requested box")
    if data.box != box:
        raise ValueError("data box does not match the requested box")
    if not np.all(np.isfinite(M.values)):
        raise DataError("input field contains NaN/Inf values")


def _grid_geometry(grid: GridSpec, box: SpaceTimeBox):
    ht, hx, hy = grid.steps(box)
    return ht, box.a1, hx, box.a2, hy


def node_traces(
    i: int,
    grid: GridSpec,
    data: BoundaryData,
    params: ModelParams,
    box: SpaceTimeBox,
):
    """(region, smax, trace) lattices for species i at every grid node."""
    region, smax = grid_regions(i, grid, params, box)
    t, x, y = grid.axes(box)
    T, X, Y = np.meshgrid(t, x, y, indexing="ij")
    trace = trace_arrays(i, region, smax, T, X, Y, data, params, box)
    if not np.all(np.isfinite(trace)):
        raise DataError(f"data trace for species {i} returned non-finite values")
    return region, smax, trace


def apply_T(
    M: Field4,
    data: BoundaryData,
    params: ModelParams,
    box: SpaceTimeBox,
    quad: Optional[QuadratureSpec] = None,
) -> OperatorOutput:
    """One application of the plain operator on the field's grid.

    The output reproduces the data exactly on the initial slice and on each
    species' inflow faces (zero travel time there), and constant Maxwellian
    states are exact fixed points: Q is evaluated on interpolated M values,
    so it vanishes identically for such states.
    """
    _check_inputs(M, data, box)
    grid = M.grid
    quad = quad or QuadratureSpec.default(params, box, grid)
    dt, x0, dx, y0, dy = _grid_geometry(grid, box)
    out = np.empty_like(M.values)
    for i in (1, 2, 3, 4):
        u, v = velocity_of(i, params)
        _, smax, trace = node_traces(i, grid, data, params, box)
        integral = kernels.plain_integral(
            M.values, smax, u, v, params.two_cs, dt, x0, dx, y0, dy, quad.max_step
        )
        out[i - 1] = trace + COLLISION_SIGNS[i - 1] * integral
    return OperatorOutput(Field4(out, grid, box), None, "transport")


def apply_T_sigma(
    M: Field4,
    sigma: float,
    data: BoundaryData,
    params: ModelParams,
    box: SpaceTimeBox,
    quad: Optional[QuadratureSpec] = None,
    unsafe_sigma: bool = False,
) -> OperatorOutput:
    """One application of the relaxed operator.

    sigma >= 2cS is enforced (the positivity threshold); pass
    unsafe_sigma=True to relax it, losing the non-negativity guarantee.
    The exponent uses rho(|M|), absolute values included, also for fields
    with negative excursions.
    """
    _check_inputs(M, data, box)
    if sigma < 0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    if sigma < params.two_cs and not unsafe_sigma:
        raise ValueError(
            f"sigma={sigma} below the positivity threshold 2cS={params.two_cs}; "
            "pass unsafe_sigma=True to override"
        )
    grid = M.grid
    quad = quad or QuadratureSpec.default(params, box, grid)
    dt, x0, dx, y0, dy = _grid_geometry(grid, box)
    out = np.empty_like(M.values)
    for i in (1, 2, 3, 4):
        u, v = velocity_of(i, params)
        _, smax, trace = node_traces(i, grid, data, params, box)
        out[i - 1] = kernels.sigma_value(
            M.values,
            trace,
            smax,
            i - 1,
            COLLISION_SIGNS[i - 1],
            u,
            v,
            params.two_cs,
            sigma,
            dt,
            x0,
            dx,
            y0,
            dy,
            quad.max_step,
        )
    return OperatorOutput(Field4(out, grid, box), None, "sigma")


def apply_T_with_derivatives(
    M: Field4,
    M_parts: FieldPartials,
    data: BoundaryData,
    params: ModelParams,
    box: SpaceTimeBox,
    quad: Optional[QuadratureSpec] = None,
    allow_fd_data: bool = True,
) -> OperatorOutput:
    """Plain operator application with the closed-form partials attached."""
    out = apply_T(M, data, params, box, quad)
    parts = apply_T_derivatives(M, M_parts, data, params, box, quad, allow_fd_data)
    return OperatorOutput(out.field, parts, "transport+derivatives")


def collision_partials(M: Field4, parts: FieldPartials, params: ModelParams):
    """(dQ/dt, dQ/dx, dQ/dy) lattices by the product rule from M and parts."""
    m = M.values
    out = []
    for d in (parts.dt, parts.dx, parts.dy):
        out.append(
            params.two_cs
            * (d[1] * m[2] + m[1] * d[2] - d[0] * m[3] - m[0] * d[3])
        )
    return tuple(out)


def apply_T_derivatives(
    M: Field4,
    M_parts: FieldPartials,
    data: BoundaryData,
    params: ModelParams,
    box: SpaceTimeBox,
    quad: Optional[QuadratureSpec] = None,
    allow_fd_data: bool = True,
) -> FieldPartials:
    """First partials of T_i(M) from the region-wise closed forms.

    Region A (exit through t=0), with g the collision sign and (u, v) the
    species velocity:

        d/dt = g (Q_node + I[-u dQ/dx - v dQ/dy]) - u N0_x - v N0_y
        d/dx = g I[dQ/dx] + N0_x,     d/dy = g I[dQ/dy] + N0_y

    Region B (exit through the x face at backward time (x-xf)/u):

        d/dt = g I[dQ/dt] + D_t
        d/dx = g Q_node/u + g I[-(1/u) dQ/dt - (v/u) dQ/dy]
               - (1/u) D_t - (v/u) D_y
        d/dy = g I[dQ/dy] + D_y

    and region C mirrors B with (v, y face, D_t, D_x).  I[.] is the
    characteristic quadrature, D_* are the data derivative samplers at the
    foot (finite-difference fallback unless allow_fd_data=False).  On the
    region-boundary planes the A > B > C priority branch is taken.
    """
    _check_inputs(M, data, box)
    if M_parts.grid != M.grid:
        raise ValueError("field and partials live on different grids")
    grid = M.grid
    quad = quad or QuadratureSpec.default(params, box, grid)
    dt, x0, dx, y0, dy = _grid_geometry(grid, box)
    qt, qx, qy = collision_partials(M, M_parts, params)
    t_ax, x_ax, y_ax = grid.axes(box)
    T, X, Y = np.meshgrid(t_ax, x_ax, y_ax, indexing="ij")
    q_node = params.two_cs * (
        M.values[1] * M.values[2] - M.values[0] * M.values[3]
    )
    out_t = np.empty_like(M.values)
    out_x = np.empty_like(M.values)
    out_y = np.empty_like(M.values)
    for i in (1, 2, 3, 4):
        u, v = velocity_of(i, params)
        g = COLLISION_SIGNS[i - 1]
        region, smax = grid_regions(i, grid, params, box)
        integ = [
            kernels.lattice_integral(
                F, smax, u, v, dt, x0, dx, y0, dy, quad.max_step
            )
            for F in (qt, qx, qy)
        ]
        i_t, i_x, i_y = integ
        n0x, n0y = data.initial_partials(i, allow_fd_data)
        bx_t, bx_y = data.x_inflow_partials(i, allow_fd_data)
        by_t, by_x = data.y_inflow_partials(i, allow_fd_data)

        dt_i = np.empty(grid.shape)
        dx_i = np.empty(grid.shape)
        dy_i = np.empty(grid.shape)

        mask = region == int(Region.A)
        if mask.any():
            fx = np.clip(X[mask] - u * T[mask], box.a1, box.b1)
            fy = np.clip(Y[mask] - v * T[mask], box.a2, box.b2)
            d0x, d0y = n0x(fx, fy), n0y(fx, fy)
            dt_i[mask] = (
                g * (q_node[mask] + (-u * i_x[mask] - v * i_y[mask]))
                - u * d0x
                - v * d0y
            )
            dx_i[mask] = g * i_x[mask] + d0x
            dy_i[mask] = g * i_y[mask] + d0y

        mask = region == int(Region.B)
        if mask.any():
            tau = np.clip(T[mask] - smax[mask], 0.0, box.t_end)
            tang = np.clip(Y[mask] - v * smax[mask], box.a2, box.b2)
            dbt, dby = bx_t(tau, tang), bx_y(tau, tang)
            dt_i[mask] = g * i_t[mask] + dbt
            dx_i[mask] = (
                g * q_node[mask] / u
                + g * (-i_t[mask] / u - (v / u) * i_y[mask])
                - dbt / u
                - (v / u) * dby
            )
            dy_i[mask] = g * i_y[mask] + dby

        mask = region == int(Region.C)
        if mask.any():
            tau = np.clip(T[mask] - smax[mask], 0.0, box.t_end)
            tang = np.clip(X[mask] - u * smax[mask], box.a1, box.b1)
            dct, dcx = by_t(tau, tang), by_x(tau, tang)
            dt_i[mask] = g * i_t[mask] + dct
            dx_i[mask] = g * i_x[mask] + dcx
            dy_i[mask] = (
                g * q_node[mask] / v
                + g * (-i_t[mask] / v - (u / v) * i_x[mask])
                - dct / v
                - (u / v) * dcx
            )

        out_t[i - 1] = dt_i
        out_x[i - 1] = dx_i
        out_y[i - 1] = dy_i

    return FieldPartials(
        dt=out_t,
        dx=out_x,
        dy=out_y,
        grid=grid,
        box=box,
        source="characteristic-formulas",
    )
