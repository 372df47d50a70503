"""Occupation-number determinants, fermionic signs and sector Hamiltonians.

A determinant is a plain Python ``int``: bit ``p`` set means spin-orbital
``p`` is occupied. The state it labels is

    a+_{p1} a+_{p2} ... |vac>,   p1 < p2 < ...

so applying ``a_p`` or ``a+_p`` picks up ``(-1)`` to the number of occupied
modes with index below ``p``. Even bits are alpha, odd bits beta.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
import scipy.sparse as sp


def popcount(x):
    return int(x).bit_count()


def spin_projection(det):
    """``n_alpha - n_beta`` (twice Sz) of a determinant."""
    alpha = det & 0x5555555555555555
    beta = det & 0xAAAAAAAAAAAAAAAA
    return popcount(alpha) - popcount(beta)


def apply_excitation(det, create=(), annihilate=()):
    """Apply ``a+_a a+_b ... a_j a_i`` to a determinant.

    ``annihilate = [i, j, ...]`` act first, ``i`` first; then
    ``create = [a, b, ...]`` act with the last entry first, so the written
    operator string reads ``create[0]+ create[1]+ ... annihilate[1] annihilate[0]``.

    Returns ``(new_det, sign)`` or ``None`` when the result vanishes.
    """
    sign = 1
    for p in annihilate:
        bit = 1 << p
        if not det & bit:
            return None
        if popcount(det & (bit - 1)) & 1:
            sign = -sign
        det ^= bit
    for p in reversed(create):
        bit = 1 << p
        if det & bit:
            return None
        if popcount(det & (bit - 1)) & 1:
            sign = -sign
        det |= bit
    return det, sign


def apply_excitation_many(dets, create=(), annihilate=()):
    """Vectorized :func:`apply_excitation` over an int64 array of determinants.

    Returns ``(new_dets, signs, valid)``; entries where ``valid`` is False
    vanished and carry meaningless ``new_dets``.
    """
    dets = np.array(dets, dtype=np.int64, copy=True)
    signs = np.ones(dets.shape, dtype=np.int64)
    valid = np.ones(dets.shape, dtype=bool)
    for p in annihilate:
        bit = np.int64(1 << p)
        valid &= (dets & bit) != 0
        signs *= 1 - 2 * (np.bitwise_count(dets & (bit - 1)) & 1).astype(np.int64)
        dets ^= bit
    for p in reversed(create):
        bit = np.int64(1 << p)
        valid &= (dets & bit) == 0
        signs *= 1 - 2 * (np.bitwise_count(dets & (bit - 1)) & 1).astype(np.int64)
        dets |= bit
    return dets, signs, valid


def reference_determinant(n_electrons):
    return (1 << n_electrons) - 1


@dataclass(frozen=True, eq=False)
class SectorBasis:
    """Determinants with fixed electron count and ``Sz``, sorted as integers."""

    m: int
    n_electrons: int
    sz_twice: int
    states: np.ndarray
    index: dict = field(repr=False)

    @classmethod
    def build(cls, m, n_electrons, sz_twice=None):
        if sz_twice is None:
            sz_twice = spin_projection(reference_determinant(n_electrons))
        if (n_electrons + sz_twice) % 2:
            raise ValueError(f"n_electrons={n_electrons} incompatible with 2Sz={sz_twice}")
        n_alpha = (n_electrons + sz_twice) // 2
        n_beta = n_electrons - n_alpha
        norb = m // 2
        if m % 2 or n_alpha < 0 or n_beta < 0 or n_alpha > norb or n_beta > norb:
            raise ValueError(f"empty sector: m={m}, N={n_electrons}, 2Sz={sz_twice}")
        dets = []
        for a in combinations(range(0, m, 2), n_alpha):
            abits = sum(1 << p for p in a)
            for b in combinations(range(1, m, 2), n_beta):
                dets.append(abits | sum(1 << p for p in b))
        states = np.array(sorted(dets), dtype=np.int64)
        index = {int(d): i for i, d in enumerate(states)}
        return cls(m, n_electrons, sz_twice, states, index)

    @property
    def dim(self):
        return len(self.states)

    def lookup(self, dets):
        """Positions of ``dets`` in the basis; -1 where absent."""
        dets = np.asarray(dets, dtype=np.int64)
        pos = np.searchsorted(self.states, dets)
        pos = np.clip(pos, 0, self.dim - 1)
        return np.where(self.states[pos] == dets, pos, -1)

    def basis_vector(self, det):
        amp = np.zeros(self.dim)
        amp[self.index[int(det)]] = 1.0
        return amp


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: SectorBasis
    amp: np.ndarray

    def norm(self):
        return float(np.linalg.norm(self.amp))

    def dot(self, other):
        _check_same_basis(self.basis, other.basis)
        return float(self.amp @ other.amp)


def _check_same_basis(a, b):
    if a is not b and (a.m, a.n_electrons, a.sz_twice) != (b.m, b.n_electrons, b.sz_twice):
        raise ValueError("state and operator live in different sectors")


@dataclass(frozen=True, eq=False)
class SparseHamiltonian:
    """Real symmetric Hamiltonian restricted to a sector, stored as CSR."""

    basis: SectorBasis
    matrix: sp.csr_matrix

    @property
    def dim(self):
        return self.basis.dim

    def diagonal(self):
        return self.matrix.diagonal()

    def toarray(self):
        return self.matrix.toarray()


def build_hamiltonian(ints, basis, tol=1e-14):
    """Matrix of the second-quantized Hamiltonian on ``basis``."""
    if basis.m != ints.m:
        raise ValueError(f"basis has {basis.m} spin-orbitals, integrals have {ints.m}")
    m = ints.m
    dets = basis.states
    cols = np.arange(basis.dim)
    rows_acc, cols_acc, vals_acc = [], [], []

    def accumulate(new, signs, valid, coef):
        if not valid.any():
            return
        target = basis.lookup(new[valid])
        keep = target >= 0
        rows_acc.append(target[keep])
        cols_acc.append(cols[valid][keep])
        vals_acc.append(coef * signs[valid][keep])

    for p in range(m):
        for q in range(m):
            coef = ints.h[p, q]
            if abs(coef) > tol:
                accumulate(*apply_excitation_many(dets, create=[p], annihilate=[q]), coef)

    # 1/2 sum v_pqrs a+p a+q a_s a_r  ==  sum_{p<q, r<s} (v_pqrs - v_pqsr) a+p a+q a_s a_r
    pairs = [(a, b) for a in range(m) for b in range(a + 1, m)]
    v = ints.v
    for r, s in pairs:
        # a_s a_r: annihilate r first, then s
        mid, mid_sign, mid_valid = apply_excitation_many(dets, annihilate=[r, s])
        if not mid_valid.any():
            continue
        for p, q in pairs:
            coef = v[p, q, r, s] - v[p, q, s, r]
            if abs(coef) <= tol:
                continue
            new, signs, valid = apply_excitation_many(mid, create=[p, q])
            accumulate(new, signs * mid_sign, valid & mid_valid, coef)

    if rows_acc:
        rows = np.concatenate(rows_acc)
        colsv = np.concatenate(cols_acc)
        vals = np.concatenate(vals_acc).astype(float)
    else:
        rows = colsv = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0)
    rows = np.concatenate([rows, cols])
    colsv = np.concatenate([colsv, cols])
    vals = np.concatenate([vals, np.full(basis.dim, float(ints.e_core))])
    mat = sp.coo_matrix((vals, (rows, colsv)), shape=(basis.dim, basis.dim)).tocsr()
    mat.sum_duplicates()
    mat.eliminate_zeros()
    return SparseHamiltonian(basis, mat)


def matvec(H, x):
    """``H @ x`` for a :class:`StateVector` or a raw amplitude array (1-D or 2-D)."""
    if isinstance(x, StateVector):
        _check_same_basis(H.basis, x.basis)
        x = x.amp
    x = np.asarray(x, dtype=float)
    if x.shape[0] != H.dim:
        raise ValueError(f"vector of length {x.shape[0]} for a {H.dim}-dim sector")
    return H.matrix @ x


def expectation(H, x):
    amp = x.amp if isinstance(x, StateVector) else np.asarray(x)
    return float(amp @ matvec(H, amp))
