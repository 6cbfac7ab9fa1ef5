"""Initial and inflow data for the four species, with compatibility checks.

Each species carries Dirichlet data on the initial slice t=0 and on the two
faces its characteristics enter through: species 1 and 3 flow in through
x=a1, species 2 and 4 through x=b1, species 1 and 2 through y=a2, species 3
and 4 through y=b2.  Data functions are samplers (callables on their
rectangle, scalar or array arguments), not pre-baked grids: the transport
operator needs them at arbitrary characteristic foot points.

The twelve corner/edge identities tying the samplers together are checked by
:func:`check_compatibility`; a solution continuous up to the boundary exists
only for compatible data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DataError
from .model import ModelParams, SpaceTimeBox, velocity_of

Sampler = Callable[..., np.ndarray]

#: Fraction of the edge length used as finite-difference step for missing
#: derivative samplers.
_FD_FRACTION = 1e-6

#: Default absolute tolerance of the compatibility check; the built-in data
#: families are analytic, so larger residuals indicate genuinely
#: incompatible data.
DEFAULT_COMPAT_TOL = 1e-9


def x_face_coord(i: int, box: SpaceTimeBox) -> float:
    """x-coordinate of the inflow face in x for species i."""
    return box.a1 if i in (1, 3) else box.b1


def y_face_coord(i: int, box: SpaceTimeBox) -> float:
    """y-coordinate of the inflow face in y for species i."""
    return box.a2 if i in (1, 2) else box.b2


def _fd_partial(g: Sampler, lo: float, hi: float, axis: int) -> Sampler:
    """One-sided-at-the-edges finite difference of a bivariate sampler."""
    h = _FD_FRACTION * (hi - lo)

    def deriv(a, b):
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        if axis == 0:
            up, dn = np.minimum(a + h, hi), np.maximum(a - h, lo)
            return (g(up, b) - g(dn, b)) / (up - dn)
        up, dn = np.minimum(b + h, hi), np.maximum(b - h, lo)
        return (g(a, up) - g(a, dn)) / (up - dn)

    return deriv


@dataclass(frozen=True)
class BoundaryData:
    """The twelve data samplers plus optional partial-derivative samplers.

    initial[i-1](x, y) on [a1,b1]x[a2,b2]; x_inflow[i-1](t, y) on the
    species' x face; y_inflow[i-1](t, x) on its y face.  Derivative tuples
    may be None; accessors fall back to finite differences of the sampler.
    """

    box: SpaceTimeBox
    initial: tuple
    x_inflow: tuple
    y_inflow: tuple
    initial_dx: Optional[tuple] = None
    initial_dy: Optional[tuple] = None
    x_inflow_dt: Optional[tuple] = None
    x_inflow_dy: Optional[tuple] = None
    y_inflow_dt: Optional[tuple] = None
    y_inflow_dx: Optional[tuple] = None
    label: str = field(default="", compare=False)

    def __post_init__(self):
        for name in ("initial", "x_inflow", "y_inflow"):
            fns = getattr(self, name)
            if len(fns) != 4 or not all(callable(f) for f in fns):
                raise ValueError(f"{name} must be a tuple of 4 callables")

    # -- rectangles -------------------------------------------------------
    def initial_rect(self):
        b = self.box
        return ((b.a1, b.b1), (b.a2, b.b2))

    def x_inflow_rect(self):
        b = self.box
        return ((0.0, b.t_end), (b.a2, b.b2))

    def y_inflow_rect(self):
        b = self.box
        return ((0.0, b.t_end), (b.a1, b.b1))

    # -- derivative accessors with finite-difference fallback -------------
    def initial_partials(self, i: int, allow_fd: bool = True):
        return (
            self._partial(self.initial_dx, self.initial, i, 0, self.initial_rect(), allow_fd),
            self._partial(self.initial_dy, self.initial, i, 1, self.initial_rect(), allow_fd),
        )

    def x_inflow_partials(self, i: int, allow_fd: bool = True):
        return (
            self._partial(self.x_inflow_dt, self.x_inflow, i, 0, self.x_inflow_rect(), allow_fd),
            self._partial(self.x_inflow_dy, self.x_inflow, i, 1, self.x_inflow_rect(), allow_fd),
        )

    def y_inflow_partials(self, i: int, allow_fd: bool = True):
        return (
            self._partial(self.y_inflow_dt, self.y_inflow, i, 0, self.y_inflow_rect(), allow_fd),
            self._partial(self.y_inflow_dx, self.y_inflow, i, 1, self.y_inflow_rect(), allow_fd),
        )

    @staticmethod
    def _partial(derivs, samplers, i, axis, rect, allow_fd):
        if derivs is not None and derivs[i - 1] is not None:
            return derivs[i - 1]
        if not allow_fd:
            raise DataError(
                f"derivative sampler missing for species {i} and finite-difference "
                "fallback disabled"
            )
        lo, hi = rect[axis]
        return _fd_partial(samplers[i - 1], lo, hi, axis)


@dataclass(frozen=True)
class CompatibilityReport:
    """Residuals of the twelve data identities and the pass verdict."""

    entries: tuple  # of (name, residual)
    tol: float
    passed: bool

    def table(self) -> str:
        lines = [f"{'identity':46s}  residual"]
        for name, res in self.entries:
            lines.append(f"{name:46s}  {res:.3e}")
        lines.append(f"tolerance {self.tol:.1e}: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)


def _eval(fn, name, a, b):
    try:
        out = np.asarray(fn(a, b), dtype=float)
    except Exception as exc:
        raise DataError(f"sampler {name} failed: {exc}") from exc
    if not np.all(np.isfinite(out)):
        raise DataError(f"sampler {name} returned non-finite values")
    return out


def check_compatibility(
    data: BoundaryData, n_samples: int = 65, tol: float = DEFAULT_COMPAT_TOL
) -> CompatibilityReport:
    """Sup residual of each of the twelve corner/edge identities.

    Per species i: initial at the x face equals x-inflow at t=0, initial at
    the y face equals y-inflow at t=0, and the two inflow samplers agree
    along the shared edge (x face, y face).
    """
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    if not tol > 0:
        raise ValueError("tol must be positive")
    b = data.box
    ts = np.linspace(0.0, b.t_end, n_samples)
    xs = np.linspace(b.a1, b.b1, n_samples)
    ys = np.linspace(b.a2, b.b2, n_samples)
    entries = []
    for i in (1, 2, 3, 4):
        xf, yf = x_face_coord(i, b), y_face_coord(i, b)
        n0 = data.initial[i - 1]
        gx = data.x_inflow[i - 1]
        gy = data.y_inflow[i - 1]
        pairs = (
            (
                f"species {i}: initial(x_face,y) = x_inflow(0,y)",
                _eval(n0, f"initial[{i}]", xf, ys),
                _eval(gx, f"x_inflow[{i}]", 0.0, ys),
            ),
            (
                f"species {i}: initial(x,y_face) = y_inflow(0,x)",
                _eval(n0, f"initial[{i}]", xs, yf),
                _eval(gy, f"y_inflow[{i}]", 0.0, xs),
            ),
            (
                f"species {i}: x_inflow(t,y_face) = y_inflow(t,x_face)",
                _eval(gx, f"x_inflow[{i}]", ts, yf),
                _eval(gy, f"y_inflow[{i}]", ts, xf),
            ),
        )
        for name, lhs, rhs in pairs:
            entries.append((name, float(np.max(np.abs(lhs - rhs)))))
    passed = all(res <= tol for _, res in entries)
    return CompatibilityReport(tuple(entries), tol, passed)


def _const_sampler(value: float) -> Sampler:
    def f(a, b):
        return value + 0.0 * (np.asarray(a, float) + np.asarray(b, float))

    return f


_ZERO = _const_sampler(0.0)


def constant_family(levels, box: SpaceTimeBox) -> BoundaryData:
    """Spatially and temporally constant data; compatible by construction.

    Equal levels across an opposite pair product (levels[1]*levels[2] ==
    levels[0]*levels[3]) make the data Maxwellian, i.e. collision-free.
    """
    levels = tuple(float(v) for v in levels)
    if len(levels) != 4:
        raise ValueError("need exactly 4 levels")
    if any(v < 0 for v in levels):
        raise ValueError(f"levels must be non-negative, got {levels}")
    consts = tuple(_const_sampler(v) for v in levels)
    zeros = (_ZERO,) * 4
    return BoundaryData(
        box=box,
        initial=consts,
        x_inflow=consts,
        y_inflow=consts,
        initial_dx=zeros,
        initial_dy=zeros,
        x_inflow_dt=zeros,
        x_inflow_dy=zeros,
        y_inflow_dt=zeros,
        y_inflow_dx=zeros,
        label=f"constant{levels}",
    )


def transport_family(
    profiles, params: ModelParams, box: SpaceTimeBox, profile_grads=None
) -> BoundaryData:
    """Data obtained by restricting globally transported profiles.

    Given profiles phi_i(xi, eta), the global functions
    g_i(t,x,y) = phi_i(x - u_i t, y - v_i t) are constant along the
    species-i characteristics, so with S=0 the exact solution is g_i and
    the restrictions to the initial slice and inflow faces are compatible
    by construction.  profile_grads, when given, is a tuple of
    (dphi/dxi, dphi/deta) pairs and yields exact derivative samplers.
    """
    if len(profiles) != 4:
        raise ValueError("need exactly 4 profiles")
    vels = [velocity_of(i, params) for i in (1, 2, 3, 4)]

    def restrict(i, mode):
        phi = profiles[i - 1]
        u, v = vels[i - 1]
        xf, yf = x_face_coord(i, box), y_face_coord(i, box)
        if mode == "initial":
            return lambda x, y: phi(np.asarray(x, float), np.asarray(y, float))
        if mode == "x":
            return lambda t, y: phi(xf - u * np.asarray(t, float), np.asarray(y, float) - v * np.asarray(t, float))
        return lambda t, x: phi(np.asarray(x, float) - u * np.asarray(t, float), yf - v * np.asarray(t, float))

    kwargs = {}
    if profile_grads is not None:
        if len(profile_grads) != 4:
            raise ValueError("need exactly 4 gradient pairs")

        def d_restrict(i, mode, which):
            dxi, deta = profile_grads[i - 1]
            u, v = vels[i - 1]
            xf, yf = x_face_coord(i, box), y_face_coord(i, box)

            def args(a, b):
                a = np.asarray(a, float)
                b = np.asarray(b, float)
                if mode == "initial":
                    return a, b
                if mode == "x":
                    return xf - u * a, b - v * a
                return b - u * a, yf - v * a

            if which == "t":
                # chain rule through xi = x - u t, eta = y - v t
                return lambda a, b: -u * dxi(*args(a, b)) - v * deta(*args(a, b))
            if which == "xi":
                return lambda a, b: dxi(*args(a, b))
            return lambda a, b: deta(*args(a, b))

        kwargs = dict(
            initial_dx=tuple(d_restrict(i, "initial", "xi") for i in (1, 2, 3, 4)),
            initial_dy=tuple(d_restrict(i, "initial", "eta") for i in (1, 2, 3, 4)),
            x_inflow_dt=tuple(d_restrict(i, "x", "t") for i in (1, 2, 3, 4)),
            x_inflow_dy=tuple(d_restrict(i, "x", "eta") for i in (1, 2, 3, 4)),
            y_inflow_dt=tuple(d_restrict(i, "y", "t") for i in (1, 2, 3, 4)),
            y_inflow_dx=tuple(d_restrict(i, "y", "xi") for i in (1, 2, 3, 4)),
        )

    return BoundaryData(
        box=box,
        initial=tuple(restrict(i, "initial") for i in (1, 2, 3, 4)),
        x_inflow=tuple(restrict(i, "x") for i in (1, 2, 3, 4)),
        y_inflow=tuple(restrict(i, "y") for i in (1, 2, 3, 4)),
        label="transport-family",
        **kwargs,
    )
