# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
# cython: language_level=3
"""Compiled characteristic-quadrature kernels.

Mirrors broadwell4._kernels_np: per node, composite trapezoid along the
backward characteristic with trilinear sampling.  Nodes are independent, so
the outer loop runs under prange; with OpenMP compiled in, set_num_threads
caps the worker count (output is deterministic either way, every node is
written by exactly one thread).
"""

import os

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport ceil, exp, fabs, floor

cnp.import_array()

cdef int _num_threads = max(1, os.cpu_count() or 1)


def set_num_threads(n):
    """Cap the number of OpenMP workers used by the kernels."""
    global _num_threads
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _num_threads = int(n)


def get_num_threads():
    return _num_threads


cdef inline void _cell(double pos, Py_ssize_t n, Py_ssize_t* cell, double* w) noexcept nogil:
    cdef double nearest = floor(pos + 0.5)
    cdef Py_ssize_t k
    cdef double ww
    if fabs(pos - nearest) <= 1e-9:
        pos = nearest
    k = <Py_ssize_t>floor(pos)
    if k < 0:
        k = 0
    if k > n - 2:
        k = n - 2
    ww = pos - k
    if ww < 0.0:
        ww = 0.0
    elif ww > 1.0:
        ww = 1.0
    cell[0] = k
    w[0] = ww


cdef inline void _interp4(const double[:, :, :, ::1] v, double tp, double xp, double yp,
                          double inv_dt, double x0, double inv_dx, double y0,
                          double inv_dy, double* out) noexcept nogil:
    cdef Py_ssize_t it, ix, iy, k
    cdef double wt, wx, wy, c00, c01, c10, c11
    _cell(tp * inv_dt, v.shape[1], &it, &wt)
    _cell((xp - x0) * inv_dx, v.shape[2], &ix, &wx)
    _cell((yp - y0) * inv_dy, v.shape[3], &iy, &wy)
    for k in range(4):
        c00 = v[k, it, ix, iy] * (1.0 - wy) + v[k, it, ix, iy + 1] * wy
        c01 = v[k, it, ix + 1, iy] * (1.0 - wy) + v[k, it, ix + 1, iy + 1] * wy
        c10 = v[k, it + 1, ix, iy] * (1.0 - wy) + v[k, it + 1, ix, iy + 1] * wy
        c11 = v[k, it + 1, ix + 1, iy] * (1.0 - wy) + v[k, it + 1, ix + 1, iy + 1] * wy
        out[k] = (c00 * (1.0 - wx) + c01 * wx) * (1.0 - wt) + \
                 (c10 * (1.0 - wx) + c11 * wx) * wt


cdef inline double _interp1(const double[:, :, ::1] v, double tp, double xp, double yp,
                            double inv_dt, double x0, double inv_dx, double y0,
                            double inv_dy) noexcept nogil:
    cdef Py_ssize_t it, ix, iy
    cdef double wt, wx, wy, c00, c01, c10, c11
    _cell(tp * inv_dt, v.shape[0], &it, &wt)
    _cell((xp - x0) * inv_dx, v.shape[1], &ix, &wx)
    _cell((yp - y0) * inv_dy, v.shape[2], &iy, &wy)
    c00 = v[it, ix, iy] * (1.0 - wy) + v[it, ix, iy + 1] * wy
    c01 = v[it, ix + 1, iy] * (1.0 - wy) + v[it, ix + 1, iy + 1] * wy
    c10 = v[it + 1, ix, iy] * (1.0 - wy) + v[it + 1, ix, iy + 1] * wy
    c11 = v[it + 1, ix + 1, iy] * (1.0 - wy) + v[it + 1, ix + 1, iy + 1] * wy
    return (c00 * (1.0 - wx) + c01 * wx) * (1.0 - wt) + \
           (c10 * (1.0 - wx) + c11 * wx) * wt


cdef inline Py_ssize_t _nsteps(double sm, double max_step) noexcept nogil:
    cdef Py_ssize_t n = <Py_ssize_t>ceil(sm / max_step - 1e-12)
    if n < 1:
        n = 1
    return n


cdef double _node_plain(const double[:, :, :, ::1] vals, double t, double x, double y,
                        double sm, double u, double v, double two_cs,
                        double inv_dt, double x0, double inv_dx, double y0,
                        double inv_dy, double max_step) noexcept nogil:
    cdef double mv[4]
    cdef Py_ssize_t n, l
    cdef double h, s, back, q, w, acc
    if sm <= 0.0:
        return 0.0
    n = _nsteps(sm, max_step)
    h = sm / n
    acc = 0.0
    for l in range(n + 1):
        s = sm if l == n else l * h
        back = sm - s
        _interp4(vals, t - back, x - u * back, y - v * back,
                 inv_dt, x0, inv_dx, y0, inv_dy, mv)
        q = two_cs * (mv[1] * mv[2] - mv[0] * mv[3])
        w = 0.5 * h if (l == 0 or l == n) else h
        acc = acc + w * q
    return acc


cdef double _node_sigma(const double[:, :, :, ::1] vals, double trace, double t,
                        double x, double y, double sm, int own, double sign,
                        double u, double v, double two_cs, double sigma,
                        double inv_dt, double x0, double inv_dx, double y0,
                        double inv_dy, double max_step) noexcept nogil:
    cdef double mv[4]
    cdef Py_ssize_t n, l, k
    cdef double h, s, back, rho, rho_prev, q, w, delta, decay, G, E
    if sm <= 0.0:
        return trace
    n = _nsteps(sm, max_step)
    h = sm / n
    _interp4(vals, t - sm, x - u * sm, y - v * sm,
             inv_dt, x0, inv_dx, y0, inv_dy, mv)
    for k in range(4):
        mv[k] = fabs(mv[k])
    rho_prev = mv[0] + mv[1] + mv[2] + mv[3]
    q = sigma * rho_prev * mv[own] + sign * two_cs * (mv[1] * mv[2] - mv[0] * mv[3])
    G = 0.5 * h * q
    E = 1.0
    for l in range(1, n + 1):
        s = sm if l == n else l * h
        back = sm - s
        _interp4(vals, t - back, x - u * back, y - v * back,
                 inv_dt, x0, inv_dx, y0, inv_dy, mv)
        for k in range(4):
            mv[k] = fabs(mv[k])
        rho = mv[0] + mv[1] + mv[2] + mv[3]
        q = sigma * rho * mv[own] + sign * two_cs * (mv[1] * mv[2] - mv[0] * mv[3])
        delta = sigma * h * 0.5 * (rho_prev + rho)
        decay = exp(-delta)
        w = 0.5 * h if l == n else h
        G = G * decay + w * q
        E = E * decay
        rho_prev = rho
    return G + trace * E


cdef double _node_lattice(const double[:, :, ::1] F, double t, double x, double y,
                          double sm, double u, double v,
                          double inv_dt, double x0, double inv_dx, double y0,
                          double inv_dy, double max_step) noexcept nogil:
    cdef Py_ssize_t n, l
    cdef double h, s, back, f, w, acc
    if sm <= 0.0:
        return 0.0
    n = _nsteps(sm, max_step)
    h = sm / n
    acc = 0.0
    for l in range(n + 1):
        s = sm if l == n else l * h
        back = sm - s
        f = _interp1(F, t - back, x - u * back, y - v * back,
                     inv_dt, x0, inv_dx, y0, inv_dy)
        w = 0.5 * h if (l == 0 or l == n) else h
        acc = acc + w * f
    return acc


def plain_integral(vals, smax, double u, double v, double two_cs, double dt,
                   double x0, double dx, double y0, double dy, double max_step):
    cdef const double[:, :, :, ::1] V = np.ascontiguousarray(vals, dtype=np.float64)
    cdef const double[:, :, ::1] SM = np.ascontiguousarray(smax, dtype=np.float64)
    cdef Py_ssize_t nt = V.shape[1], nx = V.shape[2], ny = V.shape[3]
    out_arr = np.empty((nt, nx, ny))
    cdef double[:, :, ::1] out = out_arr
    cdef double inv_dt = 1.0 / dt, inv_dx = 1.0 / dx, inv_dy = 1.0 / dy
    cdef Py_ssize_t total = nt * nx * ny
    cdef Py_ssize_t m, it, ix, iy
    cdef int nthreads = _num_threads
    for m in prange(total, nogil=True, schedule="static", num_threads=nthreads):
        it = m // (nx * ny)
        ix = (m // ny) % nx
        iy = m % ny
        out[it, ix, iy] = _node_plain(
            V, it * dt, x0 + ix * dx, y0 + iy * dy, SM[it, ix, iy],
            u, v, two_cs, inv_dt, x0, inv_dx, y0, inv_dy, max_step)
    return out_arr


def sigma_value(vals, trace, smax, int own, double sign, double u, double v,
                double two_cs, double sigma, double dt, double x0, double dx,
                double y0, double dy, double max_step):
    cdef const double[:, :, :, ::1] V = np.ascontiguousarray(vals, dtype=np.float64)
    cdef const double[:, :, ::1] TR = np.ascontiguousarray(trace, dtype=np.float64)
    cdef const double[:, :, ::1] SM = np.ascontiguousarray(smax, dtype=np.float64)
    cdef Py_ssize_t nt = V.shape[1], nx = V.shape[2], ny = V.shape[3]
    out_arr = np.empty((nt, nx, ny))
    cdef double[:, :, ::1] out = out_arr
    cdef double inv_dt = 1.0 / dt, inv_dx = 1.0 / dx, inv_dy = 1.0 / dy
    cdef Py_ssize_t total = nt * nx * ny
    cdef Py_ssize_t m, it, ix, iy
    cdef int nthreads = _num_threads
    for m in prange(total, nogil=True, schedule="static", num_threads=nthreads):
        it = m // (nx * ny)
        ix = (m // ny) % nx
        iy = m % ny
        out[it, ix, iy] = _node_sigma(
            V, TR[it, ix, iy], it * dt, x0 + ix * dx, y0 + iy * dy,
            SM[it, ix, iy], own, sign, u, v, two_cs, sigma,
            inv_dt, x0, inv_dx, y0, inv_dy, max_step)
    return out_arr


def lattice_integral(F, smax, double u, double v, double dt, double x0, double dx,
                     double y0, double dy, double max_step):
    cdef const double[:, :, ::1] FF = np.ascontiguousarray(F, dtype=np.float64)
    cdef const double[:, :, ::1] SM = np.ascontiguousarray(smax, dtype=np.float64)
    cdef Py_ssize_t nt = FF.shape[0], nx = FF.shape[1], ny = FF.shape[2]
    out_arr = np.empty((nt, nx, ny))
    cdef double[:, :, ::1] out = out_arr
    cdef double inv_dt = 1.0 / dt, inv_dx = 1.0 / dx, inv_dy = 1.0 / dy
    cdef Py_ssize_t total = nt * nx * ny
    cdef Py_ssize_t m, it, ix, iy
    cdef int nthreads = _num_threads
    for m in prange(total, nogil=True, schedule="static", num_threads=nthreads):
        it = m // (nx * ny)
        ix = (m // ny) % nx
        iy = m % ny
        out[it, ix, iy] = _node_lattice(
            FF, it * dt, x0 + ix * dx, y0 + iy * dy, SM[it, ix, iy],
            u, v, inv_dt, x0, inv_dx, y0, inv_dy, max_step)
    return out_arr
