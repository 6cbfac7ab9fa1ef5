"""Backward-characteristic geometry: exit regions, travel times, feet.

For species i at a space-time point, the backward characteristic
(t - s, x - u s, y - v s) leaves the box either through the initial slice
t=0 (region A), through the species' x inflow face (region B) or through
its y inflow face (region C).  With exit times

    s_B = (x - x_face) / u,   s_C = (y - y_face) / v

(both non-negative inside the box), the travel time is
s_max = min(t, s_B, s_C) and the region is decided by which bound is
attained, with tie priority A > B > C on the region planes; compatible
data make the choice unobservable there.

Equivalent inequality form (species 1, the others mirror): region A iff
x - c t cos >= a1 and y - c t sin >= a2; region B iff x - c t cos <= a1
and x sin - y cos <= a1 sin - a2 cos; region C otherwise.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryData, x_face_coord, y_face_coord
from .errors import DomainError
from .fields import GridSpec
from .model import ModelParams, SpaceTimeBox, velocity_of

_FACE_TOL = 1e-12


class Region(enum.IntEnum):
    A = 0  # exits through the initial slice t = 0
    B = 1  # exits through the species' x inflow face
    C = 2  # exits through the species' y inflow face


@dataclass(frozen=True)
class CharFoot:
    """Exit record: region, backward travel time, foot point, data trace.

    foot is (x0, y0) on the initial slice for region A and
    (face time, tangential coordinate) for regions B and C.
    """

    region: Region
    s_max: float
    foot: tuple[float, float]
    trace_value: float


def _tol(edge: float) -> float:
    return _FACE_TOL * max(1.0, abs(edge))


def _require_inside(t, x, y, box: SpaceTimeBox):
    for val, lo, hi, name in (
        (t, 0.0, box.t_end, "t"),
        (x, box.a1, box.b1, "x"),
        (y, box.a2, box.b2, "y"),
    ):
        if val < lo - _tol(hi - lo) or val > hi + _tol(hi - lo):
            raise DomainError(f"{name}={val} outside [{lo}, {hi}]")


def exit_times(i: int, t, x, y, params: ModelParams, box: SpaceTimeBox):
    """(s_B, s_C): backward times to the species' two inflow faces."""
    u, v = velocity_of(i, params)
    s_b = (np.asarray(x, float) - x_face_coord(i, box)) / u
    s_c = (np.asarray(y, float) - y_face_coord(i, box)) / v
    return s_b, s_c


def classify_arrays(i: int, t, x, y, params: ModelParams, box: SpaceTimeBox):
    """Region codes (uint8 values of Region) for arrays of points."""
    t = np.asarray(t, float)
    s_b, s_c = exit_times(i, t, x, y, params, box)
    is_a = (t <= s_b) & (t <= s_c)
    is_b = ~is_a & (s_b <= s_c)
    out = np.full(np.broadcast(t, s_b).shape, int(Region.C), dtype=np.uint8)
    out[is_b] = int(Region.B)
    out[is_a] = int(Region.A)
    return out


def smax_arrays(i: int, t, x, y, params: ModelParams, box: SpaceTimeBox):
    """(region codes, travel times) for arrays of points."""
    t = np.asarray(t, float)
    region = classify_arrays(i, t, x, y, params, box)
    s_b, s_c = exit_times(i, t, x, y, params, box)
    smax = np.where(
        region == int(Region.A), t, np.where(region == int(Region.B), s_b, s_c)
    )
    # exit times can undershoot 0 / overshoot t by rounding only
    smax = np.clip(smax, 0.0, t)
    return region, smax


def trace_arrays(
    i: int,
    region,
    smax,
    t,
    x,
    y,
    data: BoundaryData,
    params: ModelParams,
    box: SpaceTimeBox,
):
    """Data trace at the characteristic foot, vectorized over points."""
    u, v = velocity_of(i, params)
    region, t, x, y, smax = np.broadcast_arrays(
        region, np.asarray(t, float), np.asarray(x, float), np.asarray(y, float), smax
    )
    out = np.empty(region.shape)

    mask = region == int(Region.A)
    if mask.any():
        fx = np.clip(x[mask] - u * t[mask], box.a1, box.b1)
        fy = np.clip(y[mask] - v * t[mask], box.a2, box.b2)
        out[mask] = data.initial[i - 1](fx, fy)
    mask = region == int(Region.B)
    if mask.any():
        tau = np.clip(t[mask] - smax[mask], 0.0, box.t_end)
        tang = np.clip(y[mask] - v * smax[mask], box.a2, box.b2)
        out[mask] = data.x_inflow[i - 1](tau, tang)
    mask = region == int(Region.C)
    if mask.any():
        tau = np.clip(t[mask] - smax[mask], 0.0, box.t_end)
        tang = np.clip(x[mask] - u * smax[mask], box.a1, box.b1)
        out[mask] = data.y_inflow[i - 1](tau, tang)
    return out


def classify(
    i: int, t: float, x: float, y: float, params: ModelParams, box: SpaceTimeBox
) -> Region:
    """Exit region of the backward characteristic from a single point."""
    _require_inside(t, x, y, box)
    return Region(int(classify_arrays(i, t, x, y, params, box)[()]))


def foot(
    i: int,
    t: float,
    x: float,
    y: float,
    params: ModelParams,
    box: SpaceTimeBox,
    data: BoundaryData,
) -> CharFoot:
    """Full exit record, including the data trace at the foot."""
    _require_inside(t, x, y, box)
    region_arr, smax_arr = smax_arrays(i, t, x, y, params, box)
    region = Region(int(region_arr[()]))
    s_b, s_c = exit_times(i, t, x, y, params, box)
    raw = {Region.A: t, Region.B: float(s_b[()]), Region.C: float(s_c[()])}[region]
    if raw > t + _tol(box.t_end):
        raise RuntimeError(
            f"classification bug: species {i} region {region.name} travel time "
            f"{raw} exceeds t={t}"
        )
    smax = float(smax_arr[()])
    u, v = velocity_of(i, params)
    if region is Region.A:
        fp = (
            float(np.clip(x - u * t, box.a1, box.b1)),
            float(np.clip(y - v * t, box.a2, box.b2)),
        )
    elif region is Region.B:
        fp = (
            float(np.clip(t - smax, 0.0, box.t_end)),
            float(np.clip(y - v * smax, box.a2, box.b2)),
        )
    else:
        fp = (
            float(np.clip(t - smax, 0.0, box.t_end)),
            float(np.clip(x - u * smax, box.a1, box.b1)),
        )
    trace = float(trace_arrays(i, region_arr, smax_arr, t, x, y, data, params, box)[()])
    return CharFoot(region=region, s_max=smax, foot=fp, trace_value=trace)


def path_point(
    i: int,
    t: float,
    x: float,
    y: float,
    s: float,
    params: ModelParams,
    box: SpaceTimeBox,
):
    """Point on the backward characteristic, s time units after entry.

    s runs over [0, s_max]: s=0 is the foot (entry into the box), s=s_max
    the evaluation point itself.
    """
    _require_inside(t, x, y, box)
    _, smax = smax_arrays(i, t, x, y, params, box)
    smax = float(smax[()])
    if s < -_tol(box.t_end) or s > smax + _tol(box.t_end):
        raise ValueError(f"s={s} outside [0, {smax}]")
    s = min(max(s, 0.0), smax)
    u, v = velocity_of(i, params)
    back = smax - s
    return (
        float(np.clip(t - back, 0.0, box.t_end)),
        float(np.clip(x - u * back, box.a1, box.b1)),
        float(np.clip(y - v * back, box.a2, box.b2)),
    )


def grid_regions(
    i: int, grid: GridSpec, params: ModelParams, box: SpaceTimeBox
):
    """(region codes, s_max) lattices for every grid node, species i."""
    t, x, y = grid.axes(box)
    T, X, Y = np.meshgrid(t, x, y, indexing="ij")
    return smax_arrays(i, T, X, Y, params, box)


def nodes_off_region_planes(
    grid: GridSpec, params: ModelParams, box: SpaceTimeBox, halo: int = 1
):
    """Boolean lattice of nodes whose halo stays in one region, all species.

    The exit-region planes are where the transported field may lose
    differentiability; finite-difference stencils that straddle them see
    O(1) kinks, so conformance checks sample away from them.
    """
    ok = np.ones(grid.shape, dtype=bool)
    for i in (1, 2, 3, 4):
        region, _ = grid_regions(i, grid, params, box)
        same = np.ones(grid.shape, dtype=bool)
        for axis in range(3):
            for shift in range(1, halo + 1):
                for sgn in (-1, 1):
                    rolled = np.roll(region, sgn * shift, axis=axis)
                    same &= rolled == region
        ok &= same
    # stencil neighbours must exist: peel the outermost halo ring
    ok[:halo] = ok[-halo:] = False
    ok[:, :halo] = ok[:, -halo:] = False
    ok[:, :, :halo] = ok[:, :, -halo:] = False
    return ok
