import math

import numpy as np
import pytest

import broadwell4 as bw
from broadwell4.errors import DataError
from broadwell4.geometry import nodes_off_region_planes
from broadwell4.boundary import x_face_coord, y_face_coord

from _scenarios import (
    UNIT_BOX,
    UNIT_PARAMS,
    perturbation_data,
    random_smooth_field,
)

P, B = UNIT_PARAMS, UNIT_BOX
FREE = bw.ModelParams(c=1.0, S=0.0, theta=math.pi / 4)


def affine_transport_data(params):
    phi = [lambda xi, eta: xi + eta] + [lambda xi, eta: 0.0 * (xi + eta)] * 3
    grads = [(lambda xi, eta: 1.0 + 0.0 * xi, lambda xi, eta: 1.0 + 0.0 * xi)] + [
        (lambda xi, eta: 0.0 * xi, lambda xi, eta: 0.0 * xi)
    ] * 3
    return bw.transport_family(phi, params, B, grads)


class TestApplyT:
    def test_zero_data_zero_field(self):
        grid = bw.GridSpec(6, 6, 6)
        data = bw.constant_family((0.0,) * 4, B)
        out = bw.apply_T(bw.Field4.zeros(grid, B), data, P, B)
        assert bw.sup_norm(out.field) == 0.0
        assert out.provenance == "transport"

    def test_free_streaming_affine_value(self):
        # with S=0 the result is the transported profile regardless of M
        grid = bw.GridSpec(11, 11, 11)
        data = affine_transport_data(FREE)
        rng = np.random.default_rng(0)
        M = bw.Field4(rng.uniform(size=(4, *grid.shape)), grid, B)
        out = bw.apply_T(M, data, FREE, B)
        got = out.field.values[0, 1, 5, 5]  # node (t,x,y) = (0.1, 0.5, 0.5)
        assert got == pytest.approx(1.0 - 0.1 * math.sqrt(2), abs=1e-12)

    def test_free_streaming_matches_exact_everywhere(self):
        grid = bw.GridSpec(9, 9, 9)
        data = affine_transport_data(FREE)
        M = bw.Field4.zeros(grid, B)
        out = bw.apply_T(M, data, FREE, B)
        exact = bw.free_streaming_exact(data, FREE, B, grid)
        assert np.abs(out.field.values - exact.values).max() <= 1e-12

    def test_constant_maxwellian_fixed_point(self):
        grid = bw.GridSpec(7, 7, 7)
        levels = (0.2, 0.1, 0.4, 0.2)
        data = bw.constant_family(levels, B)
        M = bw.Field4.constant(levels, grid, B)
        out = bw.apply_T(M, data, P, B)
        assert np.abs(out.field.values - M.values).max() <= 1e-12

    def test_boundary_reproduction(self):
        grid = bw.GridSpec(9, 9, 9)
        data = perturbation_data()
        rng = np.random.default_rng(1)
        M = bw.Field4(0.01 * rng.uniform(size=(4, *grid.shape)), grid, B)
        out = bw.apply_T(M, data, P, B).field
        t_ax, x_ax, y_ax = grid.axes(B)
        X, Y = np.meshgrid(x_ax, y_ax, indexing="ij")
        for i in (1, 2, 3, 4):
            init = data.initial[i - 1](X, Y)
            assert np.abs(out.values[i - 1, 0] - init).max() <= 1e-12
            ix = 0 if x_face_coord(i, B) == B.a1 else grid.nx - 1
            Tt, Yy = np.meshgrid(t_ax, y_ax, indexing="ij")
            xin = data.x_inflow[i - 1](Tt, Yy)
            assert np.abs(out.values[i - 1, :, ix, :] - xin).max() <= 1e-12
            iy = 0 if y_face_coord(i, B) == B.a2 else grid.ny - 1
            Tt, Xx = np.meshgrid(t_ax, x_ax, indexing="ij")
            yin = data.y_inflow[i - 1](Tt, Xx)
            assert np.abs(out.values[i - 1, :, :, iy] - yin).max() <= 1e-12

    def test_lipschitz_bound(self):
        grid = bw.GridSpec(9, 9, 9)
        data = bw.constant_family((0.003,) * 4, B)
        cert = bw.certify(P, B, data, sampling=64)
        rng = np.random.default_rng(2)
        for _ in range(10):
            M = random_smooth_field(rng, grid, B, rng.uniform(0.005, 0.02))
            N = random_smooth_field(rng, grid, B, rng.uniform(0.005, 0.02))
            TM = bw.apply_T(M, data, P, B).field
            TN = bw.apply_T(N, data, P, B).field
            lhs = np.abs(TM.values - TN.values).max()
            rhs = (
                cert.p_prime
                * (bw.sup_norm(M) + bw.sup_norm(N))
                * np.abs(M.values - N.values).max()
            )
            assert lhs <= rhs * 1.05

    def test_nan_rejected(self):
        grid = bw.GridSpec(4, 4, 4)
        data = bw.constant_family((0.0,) * 4, B)
        M = bw.Field4.zeros(grid, B)
        M.values[1, 2, 2, 2] = np.nan
        with pytest.raises(DataError):
            bw.apply_T(M, data, P, B)

    def test_bad_quadrature_step(self):
        with pytest.raises(ValueError):
            bw.QuadratureSpec(0.0)

    def test_box_mismatch(self):
        grid = bw.GridSpec(4, 4, 4)
        data = bw.constant_family((0.0,) * 4, B)
        other = bw.SpaceTimeBox(0.0, 2.0, 0.0, 1.0, 1.0)
        M = bw.Field4.zeros(grid, other)
        with pytest.raises(ValueError):
            bw.apply_T(M, data, P, other)


class TestApplyTSigma:
    def test_zero(self):
        grid = bw.GridSpec(5, 5, 5)
        data = bw.constant_family((0.0,) * 4, B)
        out = bw.apply_T_sigma(bw.Field4.zeros(grid, B), 5.0, data, P, B)
        assert bw.sup_norm(out.field) == 0.0
        assert out.provenance == "sigma"

    def test_constant_equal_level_fixed_point(self):
        # the relaxed source telescopes against the outer exponential;
        # residual limited only by the trapezoid error on the exponential
        grid = bw.GridSpec(9, 9, 9)
        data = bw.constant_family((0.003,) * 4, B)
        M = bw.Field4.constant((0.003,) * 4, grid, B)
        out = bw.apply_T_sigma(M, P.two_cs, data, P, B)
        assert np.abs(out.field.values - M.values).max() <= 1e-9

    def test_positivity_random(self):
        grid = bw.GridSpec(6, 6, 6)
        data = perturbation_data()
        rng = np.random.default_rng(3)
        for _ in range(100):
            M = bw.Field4(0.01 * rng.uniform(size=(4, *grid.shape)), grid, B)
            out = bw.apply_T_sigma(M, P.two_cs, data, P, B)
            assert out.field.min_value() >= -1e-12

    def test_threshold_enforced(self):
        grid = bw.GridSpec(4, 4, 4)
        data = bw.constant_family((0.0,) * 4, B)
        M = bw.Field4.zeros(grid, B)
        with pytest.raises(ValueError):
            bw.apply_T_sigma(M, 0.5 * P.two_cs, data, P, B)
        out = bw.apply_T_sigma(M, 0.5 * P.two_cs, data, P, B, unsafe_sigma=True)
        assert bw.sup_norm(out.field) == 0.0


class TestApplyTDerivatives:
    def test_zero(self):
        grid = bw.GridSpec(5, 5, 5)
        data = bw.constant_family((0.0,) * 4, B)
        M = bw.Field4.zeros(grid, B)
        parts = bw.apply_T_derivatives(M, bw.fd_partials(M), data, P, B)
        assert parts.source == "characteristic-formulas"
        for arr in (parts.dt, parts.dx, parts.dy):
            assert np.abs(arr).max() == 0.0

    def test_free_streaming_affine_gradient(self):
        grid = bw.GridSpec(9, 9, 9)
        data = affine_transport_data(FREE)
        M = bw.Field4.zeros(grid, B)
        parts = bw.apply_T_derivatives(M, bw.fd_partials(M), data, FREE, B)
        c = math.cos(math.pi / 4) + math.sin(math.pi / 4)
        assert np.abs(parts.dx[0] - 1.0).max() <= 1e-12
        assert np.abs(parts.dy[0] - 1.0).max() <= 1e-12
        assert np.abs(parts.dt[0] + c).max() <= 1e-12
        for k in (1, 2, 3):
            assert np.abs(parts.dt[k]).max() <= 1e-12

    def test_matches_finite_differences_off_planes(self):
        grid = bw.GridSpec(33, 33, 33)
        data = perturbation_data()
        funcs = [
            lambda t, x, y, k=k: 0.003
            * (1 + 0.4 * np.sin(2 * x + 0.5 * k) * np.cos(1.5 * y - k) * np.cos(t))
            for k in range(4)
        ]
        M = bw.Field4.from_function(funcs, grid, B)
        closed = bw.apply_T_derivatives(M, bw.fd_partials(M), data, P, B)
        fd = bw.fd_partials(bw.apply_T(M, data, P, B).field)
        ok = nodes_off_region_planes(grid, P, B, halo=2)
        for a, b in ((closed.dt, fd.dt), (closed.dx, fd.dx), (closed.dy, fd.dy)):
            scale = max(np.abs(a[:, ok]).max(), np.abs(b[:, ok]).max())
            denom = np.maximum(
                np.maximum(np.abs(a[:, ok]), np.abs(b[:, ok])), 0.01 * scale
            )
            rel = np.abs(a[:, ok] - b[:, ok]) / denom
            assert rel.max() <= 0.02

    def test_derivative_bearing_output(self):
        grid = bw.GridSpec(5, 5, 5)
        data = bw.constant_family((0.003,) * 4, B)
        M = bw.Field4.constant((0.003,) * 4, grid, B)
        out = bw.apply_T_with_derivatives(M, bw.fd_partials(M), data, P, B)
        assert out.provenance == "transport+derivatives"
        assert out.partials is not None
        assert np.abs(out.field.values - 0.003).max() <= 1e-12
        assert np.abs(out.partials.dt).max() <= 1e-12

    def test_missing_derivatives_without_fallback(self):
        grid = bw.GridSpec(4, 4, 4)
        phi = [lambda xi, eta: 0.1 * xi * eta] * 4
        data = bw.transport_family(phi, P, B)  # no gradient samplers
        M = bw.Field4.zeros(grid, B)
        with pytest.raises(DataError):
            bw.apply_T_derivatives(
                M, bw.fd_partials(M), data, P, B, allow_fd_data=False
            )


class TestGrowthBound:
    def test_v_bound_smoke(self):
        grid = bw.GridSpec(17, 17, 17)
        data = bw.constant_family((0.003,) * 4, B)
        cert = bw.certify(P, B, data, sampling=64)
        rng = np.random.default_rng(4)
        for _ in range(10):
            M = random_smooth_field(rng, grid, B, rng.uniform(0.3, 1.0) * cert.r_max)
            vm = bw.v_functional(M, bw.fd_partials(M))
            out = bw.apply_T(M, data, P, B).field
            vt = bw.v_functional(out, bw.fd_partials(out))
            assert vt <= (cert.p * vm**2 + cert.q) * 1.05
