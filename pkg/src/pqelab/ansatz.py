"""Disentangled unitary coupled-cluster states on a sector basis.

``U(t) = prod_mu exp(t_mu kappa_mu)`` with the pool's first operator as the
leftmost factor, so the last operator acts on the reference first.
Each generator ``kappa = tau - tau^+`` pairs determinants ``D -> sign * D'``
(``tau D = sign D'``), and ``exp(t kappa)`` is a set of disjoint plane
rotations on those pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .fock import StateVector, apply_excitation, apply_excitation_many, reference_determinant


@dataclass(frozen=True, eq=False)
class ExcitationOp:
    """Generator ``kappa = tau - tau^+`` with ``tau = a+_a a+_b ... a_j a_i``.

    ``src``/``dst``/``sign`` list every basis pair with
    ``tau |src> = sign |dst>``; ``partner`` is the basis position of
    ``|Phi_mu> = kappa |Phi_0> = partner_sign * |dst_ref>``.
    """

    occupied: tuple
    virtual: tuple
    delta_mp: float
    partner: int
    partner_sign: int
    src: np.ndarray = field(repr=False)
    dst: np.ndarray = field(repr=False)
    sign: np.ndarray = field(repr=False)

    @property
    def rank(self):
        return len(self.occupied)

    @property
    def label(self):
        occ = ",".join(map(str, self.occupied))
        vir = ",".join(map(str, self.virtual))
        return f"{occ}->{vir}"

    @classmethod
    def build(cls, basis, occupied, virtual, orbital_energies):
        occupied, virtual = tuple(occupied), tuple(virtual)
        new, signs, valid = apply_excitation_many(basis.states, create=virtual, annihilate=occupied)
        src = np.flatnonzero(valid)
        dst = basis.lookup(new[valid])
        if np.any(dst < 0):
            raise ValueError(f"excitation {occupied}->{virtual} leaves the sector")
        ref = reference_determinant(basis.n_electrons)
        hit = apply_excitation(ref, create=virtual, annihilate=occupied)
        if hit is None:
            raise ValueError(f"excitation {occupied}->{virtual} annihilates the reference")
        eps = np.asarray(orbital_energies)
        delta = float(eps[list(occupied)].sum() - eps[list(virtual)].sum())
        return cls(
            occupied, virtual, delta, basis.index[hit[0]], hit[1],
            src, dst, signs[valid].astype(float),
        )


@dataclass(frozen=True, eq=False)
class OperatorPool:
    """Ordered generators; ``ops[0]`` is the leftmost factor of ``U(t)``."""

    basis: object
    ops: tuple
    reference: int

    @property
    def N(self):
        return len(self.ops)

    def __len__(self):
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    @property
    def delta_mp(self):
        return np.array([op.delta_mp for op in self.ops])

    def reference_state(self):
        return self.basis.basis_vector(reference_determinant(self.basis.n_electrons))

    def partner_states(self):
        """Columns ``|Phi_mu> = kappa_mu |Phi_0>``, shape ``(dim, N)``."""
        out = np.zeros((self.basis.dim, self.N))
        for k, op in enumerate(self.ops):
            out[op.partner, k] = op.partner_sign
        return out


def _alpha_count(orbitals):
    return sum(1 for p in orbitals if p % 2 == 0)


def generate_pool(ints, basis, max_rank=2):
    """All particle-hole, Sz-conserving excitations up to ``max_rank``.

    Blocks are ordered by rank (singles leftmost), and lexicographically by
    ``(occupied, virtual)`` inside a block.
    """
    if not 1 <= max_rank <= 4:
        raise ValueError("max_rank must be between 1 and 4")
    occ = range(ints.n_electrons)
    vir = range(ints.n_electrons, ints.m)
    ops = []
    for rank in range(1, max_rank + 1):
        for o in combinations(occ, rank):
            for v in combinations(vir, rank):
                if _alpha_count(o) != _alpha_count(v):
                    continue
                ops.append(ExcitationOp.build(basis, o, v, ints.orbital_energies))
    return OperatorPool(basis, tuple(ops), basis.index[reference_determinant(ints.n_electrons)])


def apply_kappa(amp, op):
    """``kappa @ amp`` for an amplitude array (rows are basis states)."""
    amp = np.asarray(amp, dtype=float)
    out = np.zeros_like(amp)
    sg = op.sign if amp.ndim == 1 else op.sign[:, None]
    out[op.dst] += sg * amp[op.src]
    out[op.src] -= sg * amp[op.dst]
    return out


def _rotate(amp, op, t):
    """In place: ``amp <- amp + sin(t) kappa amp + (1 - cos t) kappa^2 amp``.

    Only rows in the support of ``kappa`` change; there ``kappa^2 = -1``.
    """
    s, c = np.sin(t), np.cos(t)
    sg = op.sign if amp.ndim == 1 else op.sign[:, None]
    a = amp[op.src]
    b = amp[op.dst]
    amp[op.src] = c * a - s * sg * b
    amp[op.dst] = c * b + s * sg * a


def apply_exp_kappa(psi, op, t):
    """``exp(t kappa) psi`` as ``psi + sin(t) kappa psi + (1 - cos t) kappa^2 psi``."""
    amp = psi.amp if isinstance(psi, StateVector) else np.asarray(psi, dtype=float)
    k1 = apply_kappa(amp, op)
    k2 = apply_kappa(k1, op)
    out = amp + np.sin(t) * k1 + (1.0 - np.cos(t)) * k2
    return StateVector(psi.basis, out) if isinstance(psi, StateVector) else out


def apply_unitary(pool, t, amp, inverse=False):
    """``U(t) amp`` (or ``U(t)^+ amp``); ``amp`` may hold states as columns."""
    t = np.asarray(t, dtype=float)
    if t.shape != (pool.N,):
        raise ValueError(f"expected {pool.N} amplitudes, got shape {t.shape}")
    out = np.array(amp, dtype=float, copy=True)
    if inverse:
        for op, tk in zip(pool.ops, t):
            if tk:
                _rotate(out, op, -tk)
    else:
        for op, tk in zip(reversed(pool.ops), t[::-1]):
            if tk:
                _rotate(out, op, tk)
    return out


def prepare_state(pool, t):
    """``U(t) |Phi_0>`` as a :class:`StateVector`."""
    return StateVector(pool.basis, apply_unitary(pool, t, pool.reference_state()))
