"""Model constants, the four-velocity map and the collision terms.

The gas consists of four species moving with common speed c at angles
theta, theta + pi/2, theta - pi/2 and theta + pi.  Opposite pairs (1,4)
and (2,3) exchange mass through the quadratic collision rate

    Q = 2 c S (N2 N3 - N1 N4),

which enters the four transport equations with signs (+, -, -, +).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: Sign with which Q enters the equation of species 1..4.
COLLISION_SIGNS = (1.0, -1.0, -1.0, 1.0)


@dataclass(frozen=True)
class ModelParams:
    """Wave speed c, collision cross-section S and velocity angle theta.

    theta is restricted to the open interval (0, pi/2): every exit-region
    formula divides by both cos(theta) and sin(theta), so the axis-aligned
    cases are rejected at construction.  S = 0 (collisionless transport) is
    accepted; it is the free-streaming regime used by the oracle.
    """

    c: float
    S: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.c) and self.c > 0.0):
            raise ValueError(f"wave speed c must be positive, got {self.c}")
        if not (math.isfinite(self.S) and self.S >= 0.0):
            raise ValueError(f"cross-section S must be non-negative, got {self.S}")
        if not (0.0 < self.theta < math.pi / 2.0):
            raise ValueError(
                f"theta must lie strictly inside (0, pi/2), got {self.theta}"
            )

    @property
    def two_cs(self) -> float:
        return 2.0 * self.c * self.S


@dataclass(frozen=True)
class SpaceTimeBox:
    """The space-time domain [0, t_end] x [a1, b1] x [a2, b2]."""

    a1: float
    b1: float
    a2: float
    b2: float
    t_end: float

    def __post_init__(self):
        if not self.a1 < self.b1:
            raise ValueError(f"need a1 < b1, got [{self.a1}, {self.b1}]")
        if not self.a2 < self.b2:
            raise ValueError(f"need a2 < b2, got [{self.a2}, {self.b2}]")
        if not (math.isfinite(self.t_end) and self.t_end > 0.0):
            raise ValueError(f"t_end must be positive, got {self.t_end}")

    @property
    def x_extent(self) -> float:
        return self.b1 - self.a1

    @property
    def y_extent(self) -> float:
        return self.b2 - self.a2


@dataclass(frozen=True)
class Species:
    """One velocity channel: index in 1..4, its velocity and collision sign."""

    index: int
    velocity: tuple[float, float]
    collision_sign: float


def velocity_of(i: int, params: ModelParams) -> tuple[float, float]:
    """Velocity vector of species i in 1..4.

    (c cos, c sin), (-c sin, c cos), (c sin, -c cos), (-c cos, -c sin);
    all four have magnitude c, 1/4 and 2/3 are opposite pairs.
    """
    c, th = params.c, params.theta
    ct, st = math.cos(th), math.sin(th)
    if i == 1:
        return (c * ct, c * st)
    if i == 2:
        return (-c * st, c * ct)
    if i == 3:
        return (c * st, -c * ct)
    if i == 4:
        return (-c * ct, -c * st)
    raise ValueError(f"species index must be in 1..4, got {i}")


def species_table(params: ModelParams) -> tuple[Species, ...]:
    return tuple(
        Species(i, velocity_of(i, params), COLLISION_SIGNS[i - 1]) for i in (1, 2, 3, 4)
    )


def collision(n1, n2, n3, n4, params: ModelParams):
    """Collision rate Q = 2cS (n2 n3 - n1 n4); vanishes on Maxwellian states."""
    return params.two_cs * (np.asarray(n2) * n3 - np.asarray(n1) * n4)


def density(n1, n2, n3, n4):
    """Total number density, the sum of the four species densities."""
    return np.asarray(n1) + n2 + n3 + n4


def regularized_collision(i: int, n, sigma: float, params: ModelParams):
    """Relaxed source sigma * rho(n) * n_i + sign_i * Q(n).

    Non-negative for n >= 0 whenever sigma >= 2cS: expanding the product
    leaves only terms with non-negative coefficients.
    """
    if i not in (1, 2, 3, 4):
        raise ValueError(f"species index must be in 1..4, got {i}")
    if not sigma >= 0.0:
        raise ValueError(f"sigma must be non-negative, got {sigma}")
    n1, n2, n3, n4 = n
    rho = density(n1, n2, n3, n4)
    q = collision(n1, n2, n3, n4, params)
    ni = (n1, n2, n3, n4)[i - 1]
    return sigma * rho * np.asarray(ni) + COLLISION_SIGNS[i - 1] * q
