"""Exact diagonalization of a sector Hamiltonian (the FCI reference)."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fock import StateVector

DENSE_LIMIT = 512
DEGENERACY_TOL = 1e-10


class LanczosConvergenceError(RuntimeError):
    def __init__(self, residual, iterations):
        super().__init__(
            f"Lanczos did not converge after {iterations} iterations "
            f"(largest residual norm {residual:.3e})"
        )
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class SpectralOracle:
    """Lowest part of the sector spectrum.

    ``e_es`` is the lowest eigenvalue exceeding ``e_gs`` by more than
    ``DEGENERACY_TOL``; it is ``inf`` when no such level was resolved.
    """

    e_gs: float
    e_es: float
    gs_vector: StateVector
    eigenvalues: np.ndarray

    @property
    def gap(self):
        return self.e_es - self.e_gs

    def residual_norm(self, H):
        v = self.gs_vector.amp
        return float(np.linalg.norm(H.matrix @ v - self.e_gs * v))


def lanczos(matvec, dim, k=3, tol=1e-10, max_iter=None, seed=0):
    """k lowest eigenpairs of a symmetric operator.

    Plain Lanczos with full reorthogonalization against every previous
    Krylov vector. Converged when each of the ``k`` Ritz pairs has
    residual ``|beta_j * s_{j,i}| <= tol``.
    """
    k = min(k, dim)
    max_iter = dim if max_iter is None else min(max_iter, dim)
    rng = np.random.default_rng(seed)
    q = rng.standard_normal(dim)
    q /= np.linalg.norm(q)
    Q = np.zeros((max_iter + 1, dim))
    Q[0] = q
    alphas, betas = [], []
    ritz_vals = ritz_vecs = None
    worst = np.inf
    for j in range(max_iter):
        w = matvec(Q[j])
        alpha = float(Q[j] @ w)
        w -= alpha * Q[j]
        if j > 0:
            w -= betas[-1] * Q[j - 1]
        # two passes of classical Gram-Schmidt keep Q orthonormal to machine precision
        for _ in range(2):
            w -= Q[: j + 1].T @ (Q[: j + 1] @ w)
        beta = float(np.linalg.norm(w))
        alphas.append(alpha)
        T = np.diag(alphas)
        if j > 0:
            T += np.diag(betas, 1) + np.diag(betas, -1)
        theta, S = np.linalg.eigh(T)
        kk = min(k, j + 1)
        res = np.abs(beta * S[-1, :kk])
        worst = float(res.max())
        ritz_vals, ritz_vecs = theta[:kk], Q[: j + 1].T @ S[:, :kk]
        invariant = beta < 1e-12 * max(1.0, abs(theta).max())
        if (kk == k and worst <= tol) or invariant or j + 1 == dim:
            return ritz_vals, ritz_vecs
        betas.append(beta)
        Q[j + 1] = w / beta
    raise LanczosConvergenceError(worst, max_iter)


def solve(H, k=3, dense_limit=DENSE_LIMIT, tol=1e-10):
    """Lowest eigenvalues and ground vector of ``H``.

    Dense ``eigh`` for sectors up to ``dense_limit``, Lanczos above.
    """
    dim = H.dim
    if k < 2:
        raise ValueError("k must be at least 2 to resolve the first excited level")
    if k > dim:
        warnings.warn(f"k={k} exceeds sector dimension {dim}; clipping", stacklevel=2)
        k = dim
    if dim <= dense_limit:
        vals, vecs = np.linalg.eigh(H.toarray())
        vals, vecs = vals[:k], vecs[:, :k]
    else:
        vals, vecs = lanczos(lambda x: H.matrix @ x, dim, k=k, tol=tol)
    gs = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
    # fix the arbitrary eigenvector sign for reproducibility
    pivot = np.argmax(np.abs(gs))
    if gs[pivot] < 0:
        gs = -gs
    e_gs = float(vals[0])
    above = vals[vals > e_gs + DEGENERACY_TOL]
    e_es = float(above[0]) if above.size else np.inf
    return SpectralOracle(e_gs, e_es, StateVector(H.basis, gs), np.asarray(vals))
