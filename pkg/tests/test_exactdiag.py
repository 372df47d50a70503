import numpy as np
import pytest
import scipy.sparse as sp

from conftest import sidecar, system
from pqelab.exactdiag import LanczosConvergenceError, lanczos, solve
from pqelab.fock import SectorBasis, SparseHamiltonian


def _wrap(matrix):
    dim = matrix.shape[0]
    basis = SectorBasis(0, 0, 0, np.arange(dim, dtype=np.int64), {i: i for i in range(dim)})
    return SparseHamiltonian(basis, sp.csr_matrix(matrix))


def test_one_by_one_clips_k_with_warning():
    with pytest.warns(UserWarning):
        oracle = solve(_wrap(np.array([[-2.5]])))
    assert oracle.e_gs == -2.5
    assert oracle.e_es == np.inf


def test_k_below_two_rejected():
    with pytest.raises(ValueError):
        solve(_wrap(np.eye(3)), k=1)


@pytest.mark.parametrize("name", ["h2_0.7414", "h4_0.7500", "lih_1.5000"])
def test_ground_and_excited_energies(name):
    oracle = solve(system(name).hamiltonian)
    meta = sidecar(name)
    assert abs(oracle.e_gs - meta["fci_ground_energy"]) < 1e-8
    assert abs(oracle.e_es - meta["fci_first_excited_energy"]) < 1e-8
    assert oracle.residual_norm(system(name).hamiltonian) < 1e-9


def test_lanczos_matches_dense_on_random_sparse():
    A = sp.random(50, 50, density=0.1, random_state=3)
    A = (A + A.T).toarray() + np.diag(np.linspace(-5, 5, 50))
    vals, vecs = lanczos(lambda x: A @ x, 50, k=4, tol=1e-12)
    np.testing.assert_allclose(vals, np.linalg.eigvalsh(A)[:4], atol=1e-10)
    for i in range(4):
        assert np.linalg.norm(A @ vecs[:, i] - vals[i] * vecs[:, i]) < 1e-9


def test_lanczos_path_agrees_with_dense_on_beh2():
    H = system("beh2_1.0000").hamiltonian
    sparse = solve(H, k=3, dense_limit=0)
    dense = solve(H, k=3, dense_limit=10**6)
    assert abs(sparse.e_gs - dense.e_gs) < 1e-10
    assert abs(sparse.e_es - dense.e_es) < 1e-8
    assert sparse.residual_norm(H) < 1e-9
    assert abs(abs(sparse.gs_vector.dot(dense.gs_vector)) - 1) < 1e-10


def test_lanczos_reports_non_convergence():
    A = np.diag(np.arange(100.0))
    with pytest.raises(LanczosConvergenceError) as err:
        lanczos(lambda x: A @ x, 100, k=3, max_iter=5)
    assert err.value.iterations == 5


def test_ground_vector_sign_is_fixed():
    v = solve(system("h4_0.7500").hamiltonian).gs_vector.amp
    assert v[np.argmax(np.abs(v))] > 0
