"""Independent reference implementations used only by the tests.

The Jordan-Wigner operators are dense ``2^m`` matrices built from Kronecker
products; mode ``p`` is bit ``p`` of the computational-basis index, so they
share nothing with the bit-twiddling sign rule of the package.
"""

import math

import numpy as np

from pqelab.integrals import SpinOrbitalIntegrals, hartree_fock_orbital_energies, spatial_to_spin

_I = np.eye(2)
_Z = np.diag([1.0, -1.0])
_LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])  # |1> -> |0>


def annihilator(p, m):
    """Dense ``a_p`` on ``m`` modes: ``Z`` on every mode below ``p``."""
    out = np.ones((1, 1))
    for q in reversed(range(m)):
        factor = _LOWER if q == p else (_Z if q < p else _I)
        out = np.kron(out, factor)
    return out


def creator(p, m):
    return annihilator(p, m).T


def dense_hamiltonian(h, v, e_core=0.0):
    m = h.shape[0]
    a = [annihilator(p, m) for p in range(m)]
    ad = [x.T for x in a]
    H = e_core * np.eye(2**m)
    for p in range(m):
        for q in range(m):
            if h[p, q]:
                H += h[p, q] * ad[p] @ a[q]
    for p in range(m):
        for q in range(m):
            for r in range(m):
                for s in range(m):
                    if v[p, q, r, s]:
                        H += 0.5 * v[p, q, r, s] * ad[p] @ ad[q] @ a[s] @ a[r]
    return H


def excitation_matrix(create, annihilate, m):
    """``a+_{c1} a+_{c2} ... a_{aN} ... a_{a1}`` applied right to left as written."""
    out = np.eye(2**m)
    for p in annihilate:
        out = annihilator(p, m) @ out
    for p in reversed(create):
        out = creator(p, m) @ out
    return out


def kappa_matrix(op, m):
    tau = excitation_matrix(op.virtual, op.occupied, m)
    return tau - tau.T


def restrict(matrix, states):
    idx = np.asarray(states, dtype=np.int64)
    return matrix[np.ix_(idx, idx)]


def random_integrals(rng, norb=2, n_electrons=2):
    """Real integrals with the full 8-fold permutational symmetry."""
    h = rng.normal(size=(norb, norb))
    h = 0.5 * (h + h.T)
    g = rng.normal(size=(norb,) * 4)
    perms = [(0, 1, 2, 3), (1, 0, 2, 3), (0, 1, 3, 2), (1, 0, 3, 2),
             (2, 3, 0, 1), (3, 2, 0, 1), (2, 3, 1, 0), (3, 2, 1, 0)]
    g = sum(g.transpose(p) for p in perms) / 8.0
    hs, vs = spatial_to_spin(h, g)
    eps = hartree_fock_orbital_energies(hs, vs, n_electrons)
    return SpinOrbitalIntegrals(2 * norb, n_electrons, float(rng.normal()), hs, vs, eps)


def golden_section(f, a, b, tol=1e-12, max_iter=500, sqrt=math.sqrt):
    """Minimizer of a unimodal scalar function on ``[a, b]``.

    Pass ``sqrt=mpmath.sqrt`` with ``mpf`` endpoints for extended precision.
    """
    inv = (sqrt(5) - 1) / 2
    c, d = b - inv * (b - a), a + inv * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def model_jacobian(hamiltonian, pool, t):
    """Diagonal-Hamiltonian Jacobian model ``(E_mu - E) <Phi_mu|V_nu^+ kappa_nu V_nu|Phi_0>``.

    ``V_nu`` is the product of the factors to the right of ``nu``; this is
    the model whose Lipschitz constant the first-order analysis sets to 1.
    """
    from pqelab.ansatz import _rotate, apply_kappa
    from pqelab.residues import residue_sweep

    sweep = residue_sweep(hamiltonian, pool, t)
    phi0, partners, n = pool.reference_state(), pool.partner_states(), pool.N
    J = np.empty((n, n))
    for nu in range(n):
        w = phi0.copy()
        for k in range(n - 1, nu, -1):
            _rotate(w, pool.ops[k], t[k])
        w = apply_kappa(w, pool.ops[nu])
        for k in range(nu + 1, n):
            _rotate(w, pool.ops[k], -t[k])
        J[:, nu] = (sweep.e_mu - sweep.energy) * (partners.T @ w)
    return J
