"""Shared scenario builders for the test suite."""

import math

import numpy as np

import broadwell4 as bw

UNIT_PARAMS = bw.ModelParams(c=1.0, S=1.0, theta=math.pi / 4)
UNIT_BOX = bw.SpaceTimeBox(0.0, 1.0, 0.0, 1.0, 1.0)


def gaussian_profile(amp, cx, cy, width, floor=0.0):
    """(phi, dphi/dxi, dphi/deta) for floor + amp * exp(-r^2 / 2w^2)."""
    inv2w2 = 1.0 / (2.0 * width**2)

    def phi(xi, eta):
        return floor + amp * np.exp(-((xi - cx) ** 2 + (eta - cy) ** 2) * inv2w2)

    def dxi(xi, eta):
        return -2.0 * inv2w2 * (xi - cx) * amp * np.exp(
            -((xi - cx) ** 2 + (eta - cy) ** 2) * inv2w2
        )

    def deta(xi, eta):
        return -2.0 * inv2w2 * (eta - cy) * amp * np.exp(
            -((xi - cx) ** 2 + (eta - cy) ** 2) * inv2w2
        )

    return phi, dxi, deta


def perturbation_data(params=UNIT_PARAMS, box=UNIT_BOX):
    """Admissible non-Maxwellian scenario: 0.002 floor + small bumps.

    Built as a transport family (compatible by construction) with exact
    derivative samplers; certified admissible for the unit scenario.
    """
    triples = [
        gaussian_profile(6e-4, 0.4, 0.5, 0.4, floor=2e-3),
        gaussian_profile(4e-4, 0.6, 0.4, 0.4, floor=2e-3),
        gaussian_profile(5e-4, 0.5, 0.6, 0.4, floor=2e-3),
        gaussian_profile(3e-4, 0.35, 0.35, 0.4, floor=2e-3),
    ]
    return bw.transport_family(
        [t[0] for t in triples], params, box, [(t[1], t[2]) for t in triples]
    )


def random_bump_data(rng, max_amp=3e-3, params=UNIT_PARAMS, box=UNIT_BOX):
    """Random non-negative smooth transport-family data, amplitude <= max_amp.

    Amplitudes are rescaled, if needed, to keep the certificate admissible
    (q scales linearly with the data, so one rescale suffices).
    """
    shapes = [
        (
            rng.uniform(0.2, 1.0) * max_amp,
            rng.uniform(0.25, 0.75),
            rng.uniform(0.25, 0.75),
            rng.uniform(0.3, 0.5),
        )
        for _ in range(4)
    ]

    def build(scale):
        triples = [gaussian_profile(scale * a, cx, cy, w) for a, cx, cy, w in shapes]
        return bw.transport_family(
            [t[0] for t in triples], params, box, [(t[1], t[2]) for t in triples]
        )

    data = build(1.0)
    cert = bw.certify(params, box, data, sampling=64)
    if cert.pq > 0.24:
        data = build(0.24 / cert.pq)
        cert = bw.certify(params, box, data, sampling=64)
    assert cert.admissible
    return data, cert


def random_smooth_field(rng, grid, box, target_v, n_modes=3):
    """Smooth random field rescaled so the discrete C1 functional hits
    target_v exactly (the functional is absolutely homogeneous)."""
    t_ax, x_ax, y_ax = grid.axes(box)
    T, X, Y = np.meshgrid(t_ax, x_ax, y_ax, indexing="ij")
    vals = np.zeros((4, *grid.shape))
    for k in range(4):
        acc = np.zeros(grid.shape)
        for _ in range(n_modes):
            w = rng.uniform(0.3, 2.5, size=3)
            ph = rng.uniform(0.0, 2.0 * np.pi, size=3)
            acc += rng.uniform(-1.0, 1.0) * (
                np.sin(w[0] * T + ph[0])
                * np.sin(w[1] * X + ph[1])
                * np.sin(w[2] * Y + ph[2])
            )
        vals[k] = acc
    f = bw.Field4(vals, grid, box)
    v = bw.v_functional(f, bw.fd_partials(f))
    return bw.Field4(vals * (target_v / v), grid, box)
