from itertools import combinations

import numpy as np
import pytest

from conftest import sidecar, system
from oracles import dense_hamiltonian, excitation_matrix, random_integrals, restrict
from pqelab.fock import (
    SectorBasis, StateVector, apply_excitation, apply_excitation_many, build_hamiltonian,
    expectation, matvec, popcount, reference_determinant, spin_projection,
)
from pqelab.integrals import hf_energy


def test_vacuum_creation():
    assert apply_excitation(0b000, create=[0]) == (0b001, 1)


def test_annihilating_empty_orbital_vanishes():
    assert apply_excitation(0b001, annihilate=[1]) is None


def test_double_creation_vanishes():
    assert apply_excitation(0b001, create=[0]) is None


def _all_excitations(m, max_rank=2):
    for rank in range(1, max_rank + 1):
        for ann in combinations(range(m), rank):
            for cre in combinations(range(m), rank):
                yield list(cre), list(ann)


@pytest.mark.parametrize("m", [4, 6])
def test_signs_match_jordan_wigner(m):
    for create, annihilate in _all_excitations(m):
        dense = excitation_matrix(create, annihilate, m)
        for det in range(2**m):
            col = dense[:, det]
            hit = apply_excitation(det, create, annihilate)
            if hit is None:
                assert not col.any()
            else:
                expected = np.zeros(2**m)
                expected[hit[0]] = hit[1]
                np.testing.assert_array_equal(col, expected)


def test_vectorized_excitation_agrees_with_scalar():
    dets = np.arange(64, dtype=np.int64)
    for create, annihilate in _all_excitations(6):
        new, signs, valid = apply_excitation_many(dets, create, annihilate)
        for d, n, s, ok in zip(dets, new, signs, valid):
            hit = apply_excitation(int(d), create, annihilate)
            assert ok == (hit is not None)
            if ok:
                assert (int(n), int(s)) == hit


def test_sector_contents():
    basis = SectorBasis.build(8, 4)
    assert basis.dim == 36
    assert all(popcount(int(d)) == 4 and spin_projection(int(d)) == 0 for d in basis.states)
    assert list(basis.states) == sorted(basis.states)
    assert basis.lookup([basis.states[5], 0b11111111]).tolist() == [5, -1]


def test_h2_sector_has_four_states():
    assert SectorBasis.build(4, 2).dim == 4


def test_incompatible_sector_rejected():
    with pytest.raises(ValueError):
        SectorBasis.build(4, 2, sz_twice=1)
    with pytest.raises(ValueError):
        SectorBasis.build(4, 6)


def test_reference_is_lowest_bits():
    assert reference_determinant(4) == 0b1111


@pytest.mark.parametrize("norb,nel", [(2, 2), (2, 1), (3, 2), (3, 4)])
def test_hamiltonian_matches_dense_jordan_wigner(rng, norb, nel):
    ints = random_integrals(rng, norb, nel)
    basis = SectorBasis.build(ints.m, nel, nel % 2)
    H = build_hamiltonian(ints, basis)
    dense = restrict(dense_hamiltonian(ints.h, ints.v, ints.e_core), basis.states)
    np.testing.assert_allclose(H.toarray(), dense, atol=1e-12, rtol=0)


def test_empty_sector_hamiltonian_is_core_energy(rng):
    ints = random_integrals(rng, 2, 0)
    basis = SectorBasis.build(ints.m, 0)
    H = build_hamiltonian(ints, basis)
    assert H.toarray().tolist() == [[ints.e_core]]


def test_h2_ground_state_matches_fci():
    sysm = system("h2_0.7414")
    vals = np.linalg.eigvalsh(sysm.hamiltonian.toarray())
    assert abs(vals[0] - sidecar("h2_0.7414")["fci_ground_energy"]) < 1e-8


def test_matvec_basics(rng):
    sysm = system("h4_0.7500")
    H, basis = sysm.hamiltonian, sysm.basis
    dense = H.toarray()
    e0 = np.zeros(basis.dim)
    e0[0] = 1.0
    np.testing.assert_allclose(matvec(H, e0), dense[:, 0])
    x, y = rng.normal(size=(2, basis.dim))
    np.testing.assert_allclose(matvec(H, 2 * x - 3 * y), 2 * matvec(H, x) - 3 * matvec(H, y), atol=1e-12)
    phi0 = StateVector(basis, basis.basis_vector(reference_determinant(4)))
    assert abs(expectation(H, phi0) - hf_energy(sysm.integrals)) < 1e-12
    np.testing.assert_allclose(matvec(H, phi0), dense @ phi0.amp, atol=1e-14)


def test_hamiltonian_rejects_mismatched_basis():
    sysm = system("h2_0.7414")
    with pytest.raises(ValueError):
        build_hamiltonian(sysm.integrals, SectorBasis.build(8, 2))
