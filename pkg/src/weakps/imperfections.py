"""Parametric model of the gate nonidealities: two-photon interference
visibility and polarization-dependent beamsplitter transmissions.

The lossy gate is modeled in three stages acting on the signal (x) meter
density operator, followed by renormalization on coincidence detection:

1. *Central splitter*: per-photon amplitude transmissions ``sqrt(t_h)`` on
   ``|0>`` and ``sqrt(t_v)`` on ``|1>``, with the doubly-reflected ``|11>``
   two-photon amplitude interfering against double transmission
   (coincidence amplitude ``2*t_v - 1``, the sign flip of the gate).
   Reflected ``|0>`` light leaves the interferometer and never reaches the
   detectors, so it contributes loss, not interference.
2. *Visibility*: imperfect two-photon interference is modeled as a mixture
   of the coherent gate output (weight ``v``) with its computational-basis
   dephased version (weight ``1 - v``).
3. *Loss balancing*: one rotated compensating splitter per arm equalizes the
   net ``|0>``/``|1>`` transmission (per-photon factors ``sqrt(t_v)`` on
   ``|0>`` and ``sqrt(t_h)`` on ``|1>``); the residual global attenuation
   drops out on renormalization.

``t_h`` and ``t_v`` are intensity transmissions (amplitudes are their square
roots); this convention is recorded in CLI output metadata.  Residual
polarization rotations of the physical setup are not modeled.

With the textbook parameters ``(v, t_h, t_v) = (1, 1, 1/3)`` the pipeline
reproduces the ideal controlled-sign circuit exactly after renormalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GateStarved
from .states import (
    MINUS,
    PLUS,
    PROB_FLOOR,
    ProbabilityRecord,
    TwoQubitDensity,
    make_meter_state,
    make_signal_state,
)

__all__ = [
    "ImperfectionParams",
    "IDEAL_GATE",
    "VISIBILITY_MODEL",
    "central_splitter_operator",
    "balance_operator",
    "dephase_computational",
    "imperfect_joint_probs",
    "effective_kappa",
]

# Identifier written into CLI metadata so downstream consumers know which
# visibility model produced the numbers.
VISIBILITY_MODEL = "coherent-dephased-mixture-v1"


@dataclass(frozen=True)
class ImperfectionParams:
    """Gate nonideality parameters, all dimensionless in [0, 1]."""

    visibility: float
    t_h: float
    t_v: float

    def __post_init__(self) -> None:
        for name in ("visibility", "t_h", "t_v"):
            v = getattr(self, name)
            if not math.isfinite(v) or not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")


IDEAL_GATE = ImperfectionParams(visibility=1.0, t_h=1.0, t_v=1.0 / 3.0)


def central_splitter_operator(params: ImperfectionParams) -> np.ndarray:
    """Coincidence-postselected amplitude operator of the central splitter."""
    root_hv = math.sqrt(params.t_h * params.t_v)
    return np.diag([params.t_h, root_hv, root_hv, 2.0 * params.t_v - 1.0]).astype(complex)


def balance_operator(params: ImperfectionParams) -> np.ndarray:
    """Per-photon compensating splitters equalizing net H/V transmission."""
    per_photon = np.diag([math.sqrt(params.t_v), math.sqrt(params.t_h)])
    return np.kron(per_photon, per_photon).astype(complex)


def dephase_computational(rho: np.ndarray) -> np.ndarray:
    """Remove all coherences in the two-qubit computational basis."""
    return np.diag(np.diag(rho))


def imperfect_joint_probs(theta: float, mu: float, params: ImperfectionParams) -> ProbabilityRecord:
    """Coincidence outcome probabilities of the imperfect gate.

    Raises GateStarved when the total coincidence probability is numerically
    zero.  The record's ``kappa`` is the nominal ``sin(4*mu)``; see
    :func:`effective_kappa` for what a calibration would report.
    """
    rho_in = TwoQubitDensity.from_product(make_signal_state(theta), make_meter_state(mu))

    gate = central_splitter_operator(params)
    rho_gate = gate @ rho_in.rho @ gate.conj().T
    if rho_gate.trace().real <= PROB_FLOOR:
        raise GateStarved("coincidence probability is numerically zero")
    rho_gate = TwoQubitDensity(rho_gate).rho

    v = params.visibility
    rho_mixed = TwoQubitDensity(v * rho_gate + (1.0 - v) * dephase_computational(rho_gate)).rho

    balance = balance_operator(params)
    rho_balanced = balance @ rho_mixed @ balance.conj().T
    total = rho_balanced.trace().real
    if total <= PROB_FLOOR:
        raise GateStarved("coincidence probability is numerically zero")
    rho_out = TwoQubitDensity(rho_balanced / total).rho

    channels = {}
    for s_label, s_state in (("m", MINUS), ("p", PLUS)):
        for m_label, m_state in (("m", MINUS), ("p", PLUS)):
            proj = np.kron(s_state.projector(), m_state.projector())
            channels[s_label + m_label] = max(float(np.trace(proj @ rho_out).real), 0.0)
    return ProbabilityRecord(
        p_mp=channels["mp"],
        p_mm=channels["mm"],
        p_pp=channels["pp"],
        p_pm=channels["pm"],
        kappa=math.sin(4.0 * mu),
    )


def effective_kappa(
    params: ImperfectionParams, mu: float, theta_step_deg: float = 1.0
) -> float:
    """Strength a calibration of the imperfect gate would report.

    Least-squares fit of the postselection-free meter marginals
    ``p(+|theta) - p(-|theta)`` against the ideal model ``kappa * cos(4t)``
    over a theta grid.  Equals ``sin(4*mu)`` for ideal parameters.
    """
    thetas = np.deg2rad(np.arange(0.0, 90.0, theta_step_deg))
    diffs = np.empty(thetas.shape)
    for i, theta in enumerate(thetas):
        rec = imperfect_joint_probs(float(theta), mu, params)
        diffs[i] = (rec.p_pp + rec.p_mp) - (rec.p_pm + rec.p_mm)
    cos4 = np.cos(4.0 * thetas)
    return float(np.dot(cos4, diffs) / np.dot(cos4, cos4))
