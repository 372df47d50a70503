import numpy as np
import pytest
from scipy.linalg import expm

from conftest import system
from oracles import kappa_matrix, restrict
from pqelab.ansatz import (
    OperatorPool, apply_exp_kappa, apply_kappa, apply_unitary, generate_pool, prepare_state,
)
from pqelab.fock import SectorBasis, StateVector, popcount, reference_determinant
from pqelab.integrals import SpinOrbitalIntegrals


def _toy_integrals(m, n):
    return SpinOrbitalIntegrals(m, n, 0.0, np.zeros((m, m)), np.zeros((m,) * 4), np.arange(m, dtype=float))


def test_single_orbital_pair_has_no_spin_conserving_excitation():
    ints = _toy_integrals(2, 1)
    assert generate_pool(ints, SectorBasis.build(2, 1), max_rank=1).N == 0


def test_two_spatial_orbitals_one_electron():
    ints = _toy_integrals(4, 1)
    pool = generate_pool(ints, SectorBasis.build(4, 1), max_rank=1)
    assert [(op.occupied, op.virtual) for op in pool] == [((0,), (2,))]


@pytest.mark.parametrize("name", ["h2_0.7414", "h4_0.7500", "lih_1.5000"])
def test_pool_size_matches_determinant_count(name):
    """Each Sz-conserving excitation of rank k reaches a distinct rank-k determinant."""
    sysm = system(name)
    ref = reference_determinant(sysm.integrals.n_electrons)
    ranks = [popcount(int(d) & ~ref) for d in sysm.basis.states]
    pool = sysm.pool
    for k in (1, 2):
        assert sum(op.rank == k for op in pool) == ranks.count(k)


def test_pool_ordering_singles_first_then_lexicographic():
    pool = system("h4_0.7500").pool
    keys = [(op.rank, op.occupied, op.virtual) for op in pool]
    assert keys == sorted(keys)


def test_complete_pool_spans_sector():
    pool = system("h4_0.7500", 4).pool
    assert pool.N == pool.basis.dim - 1
    partners = {op.partner for op in pool}
    assert partners == set(range(pool.basis.dim)) - {pool.reference}


def test_max_rank_validated():
    sysm = system("h2_0.7414")
    with pytest.raises(ValueError):
        generate_pool(sysm.integrals, sysm.basis, max_rank=5)


def test_kappa_matches_jordan_wigner():
    sysm = system("h4_0.7500")
    basis = sysm.basis
    for op in sysm.pool:
        dense = restrict(kappa_matrix(op, basis.m), basis.states)
        np.testing.assert_array_equal(apply_kappa(np.eye(basis.dim), op), dense)


def test_kappa_maps_reference_to_partner():
    pool = system("h4_0.7500").pool
    phi0 = pool.reference_state()
    partners = pool.partner_states()
    for k, op in enumerate(pool):
        np.testing.assert_array_equal(apply_kappa(phi0, op), partners[:, k])
        np.testing.assert_array_equal(apply_kappa(partners[:, k], op), -phi0)


def test_exp_kappa_matches_dense_expm(rng):
    sysm = system("h4_0.7500")
    basis = sysm.basis
    for op in sysm.pool.ops[::3]:
        K = restrict(kappa_matrix(op, basis.m), basis.states)
        psi = rng.normal(size=basis.dim)
        t = rng.uniform(-np.pi, np.pi)
        np.testing.assert_allclose(apply_exp_kappa(psi, op, t), expm(t * K) @ psi, atol=1e-10)


def test_exp_kappa_quarter_turn_on_reference():
    pool = system("h2_0.7414").pool
    phi0 = StateVector(pool.basis, pool.reference_state())
    op = pool.ops[-1]
    out = apply_exp_kappa(phi0, op, np.pi / 4)
    expected = np.cos(np.pi / 4) * phi0.amp + np.sin(np.pi / 4) * pool.partner_states()[:, -1]
    np.testing.assert_allclose(out.amp, expected, atol=1e-15)


def test_identity_at_zero_amplitudes():
    pool = system("h4_0.7500").pool
    np.testing.assert_array_equal(prepare_state(pool, np.zeros(pool.N)).amp, pool.reference_state())


def test_half_turn_single_operator_gives_partner():
    full = system("h2_0.7414").pool
    pool = OperatorPool(full.basis, full.ops[-1:], full.reference)
    out = prepare_state(pool, np.array([np.pi / 2])).amp
    np.testing.assert_allclose(np.abs(out), np.abs(pool.partner_states()[:, 0]), atol=1e-15)


def test_operator_order_matters_and_matches_dense_product(rng):
    full = system("h4_0.7500").pool
    basis = full.basis
    single = full.ops[0]
    double = next(op for op in full.ops if op.rank == 2 and set(op.occupied) & set(single.occupied))
    t = np.array([0.7, -1.1])
    K = {id(op): restrict(kappa_matrix(op, basis.m), basis.states) for op in (single, double)}
    phi0 = full.reference_state()
    states = []
    for ops in ((single, double), (double, single)):
        pool = OperatorPool(basis, ops, full.reference)
        dense = expm(t[0] * K[id(ops[0])]) @ expm(t[1] * K[id(ops[1])]) @ phi0
        out = prepare_state(pool, t).amp
        np.testing.assert_allclose(out, dense, atol=1e-12)
        states.append(out)
    assert np.linalg.norm(states[0] - states[1]) > 1e-3


def test_inverse_undoes_unitary(rng):
    pool = system("h4_0.7500", 4).pool
    t = rng.normal(size=pool.N)
    psi = rng.normal(size=(pool.basis.dim, 3))
    back = apply_unitary(pool, t, apply_unitary(pool, t, psi), inverse=True)
    np.testing.assert_allclose(back, psi, atol=1e-12)


def test_wrong_amplitude_length_rejected():
    pool = system("h2_0.7414").pool
    with pytest.raises(ValueError):
        prepare_state(pool, np.zeros(pool.N + 1))
