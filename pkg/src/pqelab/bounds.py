"""Eigenvalue error certificates and Newton-Kantorovich rate estimates.

Functions whose preconditions fail return ``None`` instead of raising, so
that sweeps over stretched geometries (where the trial energy may sit above
the first excited level) keep running.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EXACT_TEMPLE = "exact_temple"
PRACTICAL_A = "practical_A"
KATO_BRACKET = "kato_bracket"


@dataclass(frozen=True)
class EnergyCertificate:
    """A variance-over-gap error estimate ``eps_t = r2_sum / denom``.

    ``valid`` is False when the denominator is not positive; ``eps_t`` is
    then ``inf`` (zero denominator) or the raw negative ratio.
    """

    e_trial: float
    r2_sum: float
    denom: float
    eps_t: float
    kind: str
    valid: bool = True


def _ratio(r2_sum, denom):
    if r2_sum == 0.0:
        return 0.0
    if denom == 0.0:
        return math.inf
    return r2_sum / denom


def temple_bracket(E, r2_sum, e_es):
    """``(E - r2_sum / (e_es - E), E)``, or ``None`` unless ``E < e_es``."""
    if not E < e_es:
        return None
    return (E - _ratio(r2_sum, e_es - E), E)


def kato_bracket(E, r2_sum, alpha, beta):
    """Two-sided bracket on the single eigenvalue inside ``(alpha, beta)``.

    Requires ``alpha < E < beta`` and ``r2_sum < (beta - E)(E - alpha)``;
    returns ``None`` otherwise. Infinite ``alpha``/``beta`` are allowed.
    """
    if not alpha < E < beta:
        return None
    if not r2_sum < (beta - E) * (E - alpha):
        return None
    lower = E - (r2_sum / (beta - E) if math.isfinite(beta) else 0.0)
    upper = E + (r2_sum / (E - alpha) if math.isfinite(alpha) else 0.0)
    return (lower, upper)


def overlap_lower_bound(r2_sum, E, e_gs, e_es):
    """Lower bound on the squared overlap of the trial state with the ground state.

    ``1 - r2/(e_es - e_gs)^2 * (1 + r2/(e_es - E)^2)``; may be negative
    (vacuous). ``None`` when the gap is not positive or ``E >= e_es``.
    """
    gap = e_es - e_gs
    if not gap > 0 or not E < e_es:
        return None
    return 1.0 - r2_sum / gap**2 * (1.0 + r2_sum / (e_es - E) ** 2)


def temple_certificate(E, r2_sum, e_es):
    """Exact-oracle certificate from the full-sector variance."""
    denom = e_es - E
    return EnergyCertificate(E, r2_sum, denom, _ratio(r2_sum, denom), EXACT_TEMPLE, denom > 0)


def practical_criterion(r, e0_initial, e_current):
    """Stopping quantity ``sum_A r^2 / (E_initial - E_current)``.

    Flagged invalid when the energy has not descended below its initial
    value; the optimizers never stop on an invalid value.
    """
    r2 = float(np.sum(np.square(r)))
    denom = e0_initial - e_current
    return EnergyCertificate(e_current, r2, denom, _ratio(r2, denom), PRACTICAL_A, denom > 0 or r2 == 0.0)


def one_norm_bound(r):
    """Residual 1-norm, the looser Gershgorin-style energy error estimate."""
    return float(np.sum(np.abs(r)))


def nk_rate(eta, L=1.0):
    """Contraction factor and rate ``(q, gamma_lb)`` of modified Newton.

    ``q = 1 - sqrt(1 - 2 eta L)``, ``gamma_lb = -log q``. ``None`` when
    ``2 eta L >= 1`` (no convergence predicted).
    """
    if eta < 0:
        raise ValueError("eta must be non-negative")
    x = 2.0 * eta * L
    if not x < 1.0:
        return None
    q = 1.0 - math.sqrt(1.0 - x)
    gamma = math.inf if q == 0.0 else -math.log(q)
    return q, gamma


def homo_lumo_rate_bound(r0_norm1, gap):
    """Upper bound on ``q`` from the initial residual 1-norm and the gap."""
    if not gap > 0:
        return None
    x = 2.0 * r0_norm1 / gap
    if not x < 1.0:
        return None
    return 1.0 - math.sqrt(1.0 - x)


def eta_from_sweep(r, e_mu, e0):
    """1-norm of the approximate-Newton step, ``sum |r_mu / (E_mu - E)|``."""
    return float(np.sum(np.abs(np.asarray(r) / (np.asarray(e_mu) - e0))))
