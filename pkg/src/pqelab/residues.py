"""Energies, residues and the energy-measurement ledger.

Residues are obtained the way a quantum device would get them, from three
kinds of energy expectation values:

    r_mu = E^{pi/4}_mu - E_mu / 2 - E / 2

with ``E^{pi/4}_mu`` measured on ``U(t) exp(pi/4 kappa_mu) |Phi_0>`` and
``E_mu`` on ``U(t) |Phi_mu>``. One sweep therefore costs ``2N + 1``
energy evaluations.
"""

from __future__ import annotations

import threading
from collections import Counter
from typing import NamedTuple

import numpy as np

from .ansatz import _rotate, apply_kappa, apply_unitary


class MeasurementLedger:
    """Thread-safe count of energy expectation values, split by call site."""

    SITES = ("sweep", "linesearch", "energy", "gradient")

    def __init__(self):
        self._lock = threading.Lock()
        self._counts = Counter()

    def charge(self, site, n=1):
        if n < 0:
            raise ValueError("ledger charges are non-negative")
        with self._lock:
            self._counts[site] += n

    @property
    def energy_evals(self):
        with self._lock:
            return sum(self._counts.values())

    def breakdown(self):
        with self._lock:
            return dict(self._counts)

    def __repr__(self):
        return f"MeasurementLedger({self.energy_evals}, {self.breakdown()})"


class ResidueSweep(NamedTuple):
    r: np.ndarray
    energy: float
    e_mu: np.ndarray
    e_pi4: np.ndarray


def _column_energies(H, states):
    return np.einsum("ij,ij->j", states, H.matrix @ states)


def energy(H, pool, t, ledger=None):
    """``<Psi(t)|H|Psi(t)>``; charges one evaluation."""
    psi = apply_unitary(pool, t, pool.reference_state())
    if ledger is not None:
        ledger.charge("energy")
    return float(psi @ (H.matrix @ psi))


def residue_sweep(H, pool, t, ledger=None, site="sweep"):
    """Residues from the ``2N + 1`` energy measurements at ``t``.

    Returns ``(r, E, E_mu, E_pi4)``.
    """
    n = pool.N
    ref = pool.reference_state()
    partners = pool.partner_states()
    # columns: reference, exp(pi/4 kappa_mu)|Phi_0>, |Phi_mu>
    cols = np.empty((pool.basis.dim, 2 * n + 1))
    cols[:, 0] = ref
    cols[:, 1: n + 1] = (ref[:, None] + partners) / np.sqrt(2.0)
    cols[:, n + 1:] = partners
    states = apply_unitary(pool, t, cols)
    energies = _column_energies(H, states)
    if ledger is not None:
        ledger.charge(site, 2 * n + 1)
    e0 = float(energies[0])
    e_pi4 = energies[1: n + 1]
    e_mu = energies[n + 1:]
    r = e_pi4 - 0.5 * e_mu - 0.5 * e0
    return ResidueSweep(r, e0, e_mu, e_pi4)


def residue_direct(H, pool, t):
    """``<Phi_mu| U^+ H U |Phi_0>`` by explicit projection (oracle, no ledger)."""
    psi = apply_unitary(pool, t, pool.reference_state())
    h_psi = H.matrix @ psi
    rotated = apply_unitary(pool, t, pool.partner_states())
    return rotated.T @ h_psi


def residues_full(H, pool, t):
    """Residues against every basis determinant, reference entry excluded.

    The basis is rotated by ``U(t)``; ``r_nu = <Phi_nu|U^+ H U|Phi_0>``.
    """
    psi = apply_unitary(pool, t, pool.reference_state())
    projected = apply_unitary(pool, t, H.matrix @ psi, inverse=True)
    return np.delete(projected, pool.reference)


def variance_full(H, pool, t):
    """``||H Psi||^2 - E^2``: the sum of squared residues over the whole sector."""
    psi = apply_unitary(pool, t, pool.reference_state())
    h_psi = H.matrix @ psi
    e = float(psi @ h_psi)
    return float(h_psi @ h_psi - e * e)


def energy_gradient(H, pool, t, ledger=None):
    """Exact ``dE/dt`` by reverse-mode sweep through the product of rotations.

    Returns ``(E, grad)``. The ledger is charged ``2N + 1`` evaluations,
    the cost of a parameter-shift gradient plus the energy on hardware.
    """
    t = np.asarray(t, dtype=float)
    psi = apply_unitary(pool, t, pool.reference_state())
    lam = H.matrix @ psi
    e = float(psi @ lam)
    phi = psi.copy()
    grad = np.empty(pool.N)
    for k, op in enumerate(pool.ops):
        grad[k] = 2.0 * float(lam @ apply_kappa(phi, op))
        _rotate(phi, op, -t[k])
        _rotate(lam, op, -t[k])
    if ledger is not None:
        ledger.charge("gradient", 2 * pool.N + 1)
    return e, grad
