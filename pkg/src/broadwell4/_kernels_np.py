"""NumPy fallback for the characteristic-quadrature kernels.

Same contracts as the compiled extension ``broadwell4._kernels``: every
kernel evaluates, for each grid node, a composite-trapezoid quadrature
along the node's backward characteristic, sampling lattices trilinearly at
the quadrature points.  The quadrature step is s_max / ceil(s_max /
max_step), so the foot and the evaluation point are always nodes of the
rule.

Vectorization strategy: per time slice, iterate over the quadrature level
l and update all nodes whose rule still has a level-l point; running
recurrences avoid storing whole paths (the relaxed kernel folds the nested
exponential into a single pass).
"""

from __future__ import annotations

import numpy as np

_SNAP = 1e-9


def set_num_threads(n: int) -> None:
    """Interface parity with the compiled backend; NumPy runs single-threaded."""
    if n < 1:
        raise ValueError("thread count must be >= 1")


def get_num_threads() -> int:
    return 1


def _cells(pos, n):
    nearest = np.rint(pos)
    pos = np.where(np.abs(pos - nearest) <= _SNAP, nearest, pos)
    cell = np.clip(np.floor(pos).astype(np.intp), 0, n - 2)
    w = np.clip(pos - cell, 0.0, 1.0)
    return cell, w


def _interp(stack, tp, xp, yp, dt, x0, dx, y0, dy):
    """Trilinear samples of K stacked lattices: (K, nt, nx, ny) -> (K, npts)."""
    K, nt, nx, ny = stack.shape
    it, wt = _cells(tp / dt, nt)
    ix, wx = _cells((xp - x0) / dx, nx)
    iy, wy = _cells((yp - y0) / dy, ny)
    flat = stack.reshape(K, -1)
    base = (it * nx + ix) * ny + iy
    out = np.zeros((K, tp.size))
    for dt_ in (0, 1):
        ct = wt if dt_ else 1.0 - wt
        for dx_ in (0, 1):
            cx = wx if dx_ else 1.0 - wx
            for dy_ in (0, 1):
                cy = wy if dy_ else 1.0 - wy
                idx = base + (dt_ * nx + dx_) * ny + dy_
                out += (ct * cx * cy) * flat[:, idx]
    return out


def _step_counts(sm, max_step):
    n = np.ceil(sm / max_step - 1e-12).astype(np.int64)
    np.clip(n, 1, None, out=n)
    n[sm <= 0.0] = 0
    return n


def _slice_points(l, idx, sm, h, n, t, Xf, Yf, u, v):
    smi = sm[idx]
    s = np.where(l == n[idx], smi, l * h[idx])
    back = smi - s
    return t - back, Xf[idx] - u * back, Yf[idx] - v * back


def plain_integral(vals, smax, u, v, two_cs, dt, x0, dx, y0, dy, max_step):
    """integral of Q(M) along each node's backward characteristic.

    vals: (4, nt, nx, ny) lattices of M; smax: (nt, nx, ny) travel times.
    Q is formed from the interpolated M values (interpolate-then-collide).
    """
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    nt, nx, ny = vals.shape[1:]
    out = np.zeros((nt, nx, ny))
    Xf, Yf = _node_xy(nx, ny, x0, dx, y0, dy)
    for it in range(nt):
        t = it * dt
        sm = smax[it].ravel()
        n = _step_counts(sm, max_step)
        h = np.where(n > 0, sm / np.maximum(n, 1), 0.0)
        acc = np.zeros(sm.size)
        for l in range(int(n.max(initial=0)) + 1):
            idx = np.flatnonzero(n >= max(l, 1))
            if idx.size == 0:
                break
            tp, xp, yp = _slice_points(l, idx, sm, h, n, t, Xf, Yf, u, v)
            m = _interp(vals, tp, xp, yp, dt, x0, dx, y0, dy)
            q = two_cs * (m[1] * m[2] - m[0] * m[3])
            w = h[idx] * np.where((l == 0) | (l == n[idx]), 0.5, 1.0)
            acc[idx] += w * q
        out[it] = acc.reshape(nx, ny)
    return out


def sigma_value(
    vals, trace, smax, own, sign, u, v, two_cs, sigma, dt, x0, dx, y0, dy, max_step
):
    """Relaxed-operator node values for one species.

    Computes (integral_0^smax e^{sigma P(s)} Qs(|M|) ds + trace) *
    e^{-sigma P(smax)} with P the running trapezoid prefix integral of
    rho(|M|) along the characteristic and Qs = sigma rho(|M|) |M_own| +
    sign * Q(|M|).  The exponentials are folded into the forward pass, so
    only non-positive exponents are ever taken.
    """
    vals = np.ascontiguousarray(vals, dtype=np.float64)
    nt, nx, ny = vals.shape[1:]
    out = np.empty((nt, nx, ny))
    Xf, Yf = _node_xy(nx, ny, x0, dx, y0, dy)
    for it in range(nt):
        t = it * dt
        sm = smax[it].ravel()
        n = _step_counts(sm, max_step)
        h = np.where(n > 0, sm / np.maximum(n, 1), 0.0)
        G = np.zeros(sm.size)
        E = np.ones(sm.size)
        rho_prev = np.zeros(sm.size)
        for l in range(int(n.max(initial=0)) + 1):
            idx = np.flatnonzero(n >= max(l, 1))
            if idx.size == 0:
                break
            tp, xp, yp = _slice_points(l, idx, sm, h, n, t, Xf, Yf, u, v)
            a = np.abs(_interp(vals, tp, xp, yp, dt, x0, dx, y0, dy))
            rho = a.sum(axis=0)
            q = sigma * rho * a[own] + sign * two_cs * (a[1] * a[2] - a[0] * a[3])
            if l == 0:
                G[idx] = 0.5 * h[idx] * q
            else:
                delta = sigma * h[idx] * 0.5 * (rho_prev[idx] + rho)
                decay = np.exp(-delta)
                w = h[idx] * np.where(l == n[idx], 0.5, 1.0)
                G[idx] = G[idx] * decay + w * q
                E[idx] *= decay
            rho_prev[idx] = rho
        out[it] = (G + trace[it].ravel() * E).reshape(nx, ny)
    return out


def lattice_integral(F, smax, u, v, dt, x0, dx, y0, dy, max_step):
    """integral of a single interpolated lattice along the characteristics."""
    F = np.ascontiguousarray(F, dtype=np.float64)
    nt, nx, ny = F.shape
    stack = F[None]
    out = np.zeros((nt, nx, ny))
    Xf, Yf = _node_xy(nx, ny, x0, dx, y0, dy)
    for it in range(nt):
        t = it * dt
        sm = smax[it].ravel()
        n = _step_counts(sm, max_step)
        h = np.where(n > 0, sm / np.maximum(n, 1), 0.0)
        acc = np.zeros(sm.size)
        for l in range(int(n.max(initial=0)) + 1):
            idx = np.flatnonzero(n >= max(l, 1))
            if idx.size == 0:
                break
            tp, xp, yp = _slice_points(l, idx, sm, h, n, t, Xf, Yf, u, v)
            f = _interp(stack, tp, xp, yp, dt, x0, dx, y0, dy)[0]
            w = h[idx] * np.where((l == 0) | (l == n[idx]), 0.5, 1.0)
            acc[idx] += w * f
        out[it] = acc.reshape(nx, ny)
    return out


def _node_xy(nx, ny, x0, dx, y0, dy):
    X, Y = np.meshgrid(x0 + dx * np.arange(nx), y0 + dy * np.arange(ny), indexing="ij")
    return X.ravel(), Y.ravel()
