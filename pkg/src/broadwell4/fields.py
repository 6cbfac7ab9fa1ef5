"""Uniform space-time lattices for the four densities, plus norms.

A Field4 stores the four species densities on a shared (t, x, y) node
lattice covering the box exactly.  Interpolation between nodes is
trilinear: order two, exact on affine data, and monotone, so positive
node values never interpolate to negative ones.  All norms are taken
over grid nodes only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .model import SpaceTimeBox

#: Relative snap tolerance for interpolation positions measured in cells.
_SNAP = 1e-9
#: Absolute face tolerance, scaled by max(1, edge length) per axis.
_FACE_TOL = 1e-12


@dataclass(frozen=True)
class GridSpec:
    """Node counts per axis; node (0,.,.) sits at t=0 and (nt-1,.,.) at t=T."""

    nt: int
    nx: int
    ny: int

    def __post_init__(self):
        for name, n in (("nt", self.nt), ("nx", self.nx), ("ny", self.ny)):
            if not (isinstance(n, int) and n >= 2):
                raise ValueError(f"{name} must be an integer >= 2, got {n}")

    def steps(self, box: SpaceTimeBox) -> tuple[float, float, float]:
        return (
            box.t_end / (self.nt - 1),
            box.x_extent / (self.nx - 1),
            box.y_extent / (self.ny - 1),
        )

    def axes(self, box: SpaceTimeBox):
        t = np.linspace(0.0, box.t_end, self.nt)
        x = np.linspace(box.a1, box.b1, self.nx)
        y = np.linspace(box.a2, box.b2, self.ny)
        return t, x, y

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nt, self.nx, self.ny)


@dataclass(frozen=True)
class Field4:
    """Four density lattices of shape (nt, nx, ny) over one grid."""

    values: np.ndarray  # shape (4, nt, nx, ny), float64
    grid: GridSpec
    box: SpaceTimeBox

    def __post_init__(self):
        v = np.ascontiguousarray(self.values, dtype=np.float64)
        if v.shape != (4, *self.grid.shape):
            raise ValueError(
                f"values shape {v.shape} does not match grid {(4, *self.grid.shape)}"
            )
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, grid: GridSpec, box: SpaceTimeBox) -> "Field4":
        return cls(np.zeros((4, *grid.shape)), grid, box)

    @classmethod
    def constant(cls, levels, grid: GridSpec, box: SpaceTimeBox) -> "Field4":
        vals = np.empty((4, *grid.shape))
        for k in range(4):
            vals[k] = levels[k]
        return cls(vals, grid, box)

    @classmethod
    def from_function(cls, funcs, grid: GridSpec, box: SpaceTimeBox) -> "Field4":
        """Sample four callables f(t, x, y) on the node lattice."""
        t, x, y = grid.axes(box)
        T, X, Y = np.meshgrid(t, x, y, indexing="ij")
        vals = np.stack([np.broadcast_to(f(T, X, Y), grid.shape) for f in funcs])
        return cls(np.array(vals, dtype=np.float64), grid, box)

    def copy(self) -> "Field4":
        return Field4(self.values.copy(), self.grid, self.box)

    def min_value(self) -> float:
        return float(self.values.min())


@dataclass(frozen=True)
class FieldPartials:
    """Per-species d/dt, d/dx, d/dy lattices over one grid.

    ``source`` records how they were produced ("finite-difference" or
    "characteristic-formulas").
    """

    dt: np.ndarray  # shape (4, nt, nx, ny)
    dx: np.ndarray
    dy: np.ndarray
    grid: GridSpec
    box: SpaceTimeBox
    source: str = field(default="finite-difference")


def _positions(coord, lo, hi, n, name):
    """Map physical coordinates to fractional node positions with clamping.

    Coordinates outside [lo, hi] by more than the face tolerance raise
    DomainError; values inside the tolerance are clamped onto the face.
    Positions within _SNAP cells of a node snap onto it so lattice values
    are reproduced bit-exactly at the nodes.
    """
    coord = np.asarray(coord, dtype=np.float64)
    tol = _FACE_TOL * max(1.0, abs(hi - lo))
    if np.any(coord < lo - tol) or np.any(coord > hi + tol):
        bad_lo = float(np.min(coord))
        bad_hi = float(np.max(coord))
        raise DomainError(
            f"{name} coordinate outside [{lo}, {hi}] beyond tolerance "
            f"(sampled range [{bad_lo}, {bad_hi}])"
        )
    coord = np.clip(coord, lo, hi)
    pos = (coord - lo) * ((n - 1) / (hi - lo))
    nearest = np.rint(pos)
    pos = np.where(np.abs(pos - nearest) <= _SNAP, nearest, pos)
    cell = np.clip(np.floor(pos).astype(np.intp), 0, n - 2)
    w = np.clip(pos - cell, 0.0, 1.0)
    return cell, w


def sample(f: Field4, i: int, t, x, y):
    """Trilinear interpolation of species i at (t, x, y) inside the box.

    Accepts scalars or broadcastable arrays; exact at grid nodes.
    """
    if i not in (1, 2, 3, 4):
        raise ValueError(f"species index must be in 1..4, got {i}")
    g, b = f.grid, f.box
    t, x, y = np.broadcast_arrays(
        np.asarray(t, float), np.asarray(x, float), np.asarray(y, float)
    )
    scalar = t.ndim == 0
    it, wt = _positions(t, 0.0, b.t_end, g.nt, "t")
    ix, wx = _positions(x, b.a1, b.b1, g.nx, "x")
    iy, wy = _positions(y, b.a2, b.b2, g.ny, "y")
    v = f.values[i - 1]
    out = np.zeros(t.shape)
    for dt_ in (0, 1):
        ct = wt if dt_ else 1.0 - wt
        for dx_ in (0, 1):
            cx = wx if dx_ else 1.0 - wx
            for dy_ in (0, 1):
                cy = wy if dy_ else 1.0 - wy
                out += ct * cx * cy * v[it + dt_, ix + dx_, iy + dy_]
    return float(out) if scalar else out


def sup_norm(f: Field4) -> float:
    """max over species and nodes of |value|."""
    return float(np.abs(f.values).max())


def _axis_derivative(v: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Second-order finite differences along one axis (>= 3 nodes)."""
    out = np.empty_like(v)
    mid = [slice(None)] * v.ndim

    def at(idx):
        s = list(mid)
        s[axis] = idx
        return tuple(s)

    out[at(slice(1, -1))] = (v[at(slice(2, None))] - v[at(slice(None, -2))]) / (2 * h)
    out[at(0)] = (-3 * v[at(0)] + 4 * v[at(1)] - v[at(2)]) / (2 * h)
    out[at(-1)] = (3 * v[at(-1)] - 4 * v[at(-2)] + v[at(-3)]) / (2 * h)
    return out


def fd_partials(f: Field4) -> FieldPartials:
    """Finite-difference partials: central inside, one-sided order two on faces.

    Exact for data at most quadratic along the differenced axis.
    """
    g = f.grid
    if min(g.nt, g.nx, g.ny) < 3:
        raise ValueError("fd_partials needs at least 3 nodes per axis")
    ht, hx, hy = g.steps(f.box)
    return FieldPartials(
        dt=_axis_derivative(f.values, ht, 1),
        dx=_axis_derivative(f.values, hx, 2),
        dy=_axis_derivative(f.values, hy, 3),
        grid=g,
        box=f.box,
        source="finite-difference",
    )


def v_functional(f: Field4, parts: FieldPartials) -> float:
    """max of the sup norms of the field and its three partials."""
    if parts.grid != f.grid:
        raise ValueError("field and partials live on different grids")
    return float(
        max(
            sup_norm(f),
            np.abs(parts.dt).max(),
            np.abs(parts.dx).max(),
            np.abs(parts.dy).max(),
        )
    )


def c1_norm(g, g_a, g_b, rect, n_samples: int = 256) -> float:
    """sup-norm based C1 norm of a bivariate sampler over a rectangle.

    rect = ((lo_a, hi_a), (lo_b, hi_b)).  g_a, g_b are the partial
    samplers; pass None to fall back to finite differences of g with step
    1e-6 x edge length (one-sided at the rectangle edges).  The sup is
    approximated on an n_samples x n_samples lattice including the edges.
    """
    (lo_a, hi_a), (lo_b, hi_b) = rect
    a = np.linspace(lo_a, hi_a, n_samples)
    b = np.linspace(lo_b, hi_b, n_samples)
    A, B = np.meshgrid(a, b, indexing="ij")
    vals = [np.max(np.abs(g(A, B)))]
    for fn, axis in ((g_a, 0), (g_b, 1)):
        if fn is not None:
            vals.append(np.max(np.abs(fn(A, B))))
        else:
            lo, hi = (lo_a, hi_a) if axis == 0 else (lo_b, hi_b)
            h = 1e-6 * (hi - lo)
            if axis == 0:
                up = g(np.minimum(A + h, hi_a), B)
                dn = g(np.maximum(A - h, lo_a), B)
                span = np.minimum(A + h, hi_a) - np.maximum(A - h, lo_a)
            else:
                up = g(A, np.minimum(B + h, hi_b))
                dn = g(A, np.maximum(B - h, lo_b))
                span = np.minimum(B + h, hi_b) - np.maximum(B - h, lo_b)
            vals.append(np.max(np.abs((up - dn) / span)))
    return float(max(vals))


def write_snapshot_csv(f: Field4, time_index: int, path) -> None:
    """One time slice as CSV: t,x,y,N1,N2,N3,N4, row-major over (x, y).

    Numbers are written with repr, i.e. shortest round-trip precision.
    """
    g = f.grid
    if not 0 <= time_index < g.nt:
        raise ValueError(f"time index {time_index} outside 0..{g.nt - 1}")
    t_ax, x_ax, y_ax = g.axes(f.box)
    t = t_ax[time_index]
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,x,y,N1,N2,N3,N4\n")
        for ix in range(g.nx):
            for iy in range(g.ny):
                row = [t, x_ax[ix], y_ax[iy]] + [
                    f.values[k, time_index, ix, iy] for k in range(4)
                ]
                fh.write(",".join(repr(float(v)) for v in row) + "\n")


def read_snapshot_csv(path):
    """Inverse of write_snapshot_csv; returns (t, x, y, values) arrays."""
    data = np.genfromtxt(path, delimiter=",", names=True)
    cols = [data[name] for name in ("t", "x", "y", "N1", "N2", "N3", "N4")]
    return tuple(np.asarray(c, float) for c in cols)
