"""Explicit a-priori constants and the admissibility certificate.

The growth bound V(T(M)) <= p V(M)^2 + q and the Lipschitz estimate
||T(M) - T(N)|| <= p' (||M|| + ||N||) ||M - N|| come with fully explicit
constants in terms of the domain dimensions and the C1 norms of the data.
Whenever p q <= 1/4 the closed ball of radius R is invariant under the
operator for every R in [(1 - sqrt(1-4pq))/(2p), (1 + sqrt(1-4pq))/(2p)],
which yields existence of a fixed point there, and p'/p <= 1/2 makes it
unique in the certified ball.  The certificate records all of this; an
inadmissible product is a reported state, not an error (the condition is
sufficient, not necessary).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional

from .boundary import BoundaryData
from .fields import c1_norm
from .model import ModelParams, SpaceTimeBox

#: Default per-axis resolution for the sup-norm sampling of the data norms.
DEFAULT_C1_SAMPLING = 256


def _trig(params: ModelParams):
    ccos = params.c * math.cos(params.theta)
    csin = params.c * math.sin(params.theta)
    return ccos, csin, math.tan(params.theta), 1.0 / math.tan(params.theta)


def compute_beta_t(params: ModelParams, box: SpaceTimeBox) -> float:
    ccos, csin, _, _ = _trig(params)
    T = box.t_end
    return max(1.0 + 2.0 * T * (ccos + csin), 2.0 * T)


def compute_beta(params: ModelParams, box: SpaceTimeBox) -> float:
    ccos, csin, tan, cot = _trig(params)
    return max(1.0 / ccos, 1.0 / csin) + 2.0 * max(
        1.0 / ccos,
        1.0 / csin,
        (1.0 / ccos) * (1.0 / ccos + tan),
        (1.0 / csin) * (1.0 / csin + cot),
    ) * max(box.x_extent, box.y_extent)


def compute_alpha(params: ModelParams, box: SpaceTimeBox) -> float:
    ccos, csin, _, _ = _trig(params)
    return max(
        box.x_extent / ccos,
        box.y_extent / csin,
        box.x_extent / csin,
        box.y_extent / ccos,
    )


def compute_p(params: ModelParams, box: SpaceTimeBox) -> float:
    """Growth constant: 4cS * max(beta_T, beta); scales linearly in S."""
    return 4.0 * params.c * params.S * max(
        compute_beta_t(params, box), compute_beta(params, box)
    )


def compute_p_prime(params: ModelParams, box: SpaceTimeBox) -> float:
    """Lipschitz constant: 4cS * max(T, alpha)."""
    ccos, csin, _, _ = _trig(params)
    return 4.0 * params.c * params.S * max(
        box.t_end,
        box.x_extent / ccos,
        box.y_extent / csin,
        box.x_extent / csin,
        box.y_extent / ccos,
    )


def data_weights(params: ModelParams):
    """(initial, per-species x-face, per-species y-face) weight table.

    Transcribed term by term from the displayed growth bound: the initial
    weight is max(1, c cos + c sin); the face weights pair 1/|u_i| with
    |v_i/u_i| (x faces) and 1/|v_i| with |u_i/v_i| (y faces).
    """
    ccos, csin, tan, cot = _trig(params)
    w_initial = max(1.0, ccos + csin)
    w_cos = max(1.0, 1.0 / ccos + tan)
    w_sin = max(1.0, 1.0 / csin + cot)
    x_face = {1: w_cos, 2: w_sin, 3: w_sin, 4: w_cos}
    y_face = {1: w_sin, 2: w_cos, 3: w_cos, 4: w_sin}
    return w_initial, x_face, y_face


def compute_q(
    data: BoundaryData, params: ModelParams, sampling: int = DEFAULT_C1_SAMPLING
) -> float:
    """Data constant: weighted max over the nine C1 data norms."""
    w_initial, x_face, y_face = data_weights(params)
    terms = []
    for i in (1, 2, 3, 4):
        d0x, d0y = data.initial_partials(i)
        terms.append(
            w_initial
            * c1_norm(data.initial[i - 1], d0x, d0y, data.initial_rect(), sampling)
        )
        bxt, bxy = data.x_inflow_partials(i)
        terms.append(
            x_face[i]
            * c1_norm(data.x_inflow[i - 1], bxt, bxy, data.x_inflow_rect(), sampling)
        )
        byt, byx = data.y_inflow_partials(i)
        terms.append(
            y_face[i]
            * c1_norm(data.y_inflow[i - 1], byt, byx, data.y_inflow_rect(), sampling)
        )
    return float(max(terms))


@dataclass(frozen=True)
class BoundCertificate:
    p: float
    q: float
    p_prime: float
    alpha: float
    beta_t: float
    beta: float
    pq: float
    ratio: float  # p'/p, <= 1/2 for every valid configuration
    admissible: bool
    r_min: Optional[float]
    r_max: Optional[float]
    c1_sampling: int

    def to_dict(self) -> dict:
        out = asdict(self)
        # keep the payload strict-JSON safe (S=0 gives an infinite window)
        if out["r_max"] is not None and math.isinf(out["r_max"]):
            out["r_max"] = "inf"
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def certify(
    params: ModelParams,
    box: SpaceTimeBox,
    data: BoundaryData,
    sampling: int = DEFAULT_C1_SAMPLING,
) -> BoundCertificate:
    """Assemble all constants and the guaranteed solution-bound window.

    For S=0 the quadratic degenerates (p=0): the window is [q, inf) and the
    configuration is trivially admissible.
    """
    p = compute_p(params, box)
    p_prime = compute_p_prime(params, box)
    q = compute_q(data, params, sampling)
    pq = p * q
    admissible = pq <= 0.25
    if p > 0:
        ratio = p_prime / p
        if ratio > 0.5 + 1e-12:
            raise RuntimeError(
                f"uniqueness ratio p'/p = {ratio} exceeds 1/2: constant "
                "transcription bug"
            )
        if admissible:
            disc = math.sqrt(max(0.0, 1.0 - 4.0 * pq))
            r_min = (1.0 - disc) / (2.0 * p)
            r_max = (1.0 + disc) / (2.0 * p)
        else:
            r_min = r_max = None
    else:
        ratio = 0.0
        r_min, r_max = q, math.inf
    return BoundCertificate(
        p=p,
        q=q,
        p_prime=p_prime,
        alpha=compute_alpha(params, box),
        beta_t=compute_beta_t(params, box),
        beta=compute_beta(params, box),
        pq=pq,
        ratio=ratio,
        admissible=admissible,
        r_min=r_min,
        r_max=r_max,
        c1_sampling=sampling,
    )
