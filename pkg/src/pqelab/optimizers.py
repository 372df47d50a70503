"""Residue-based amplitude optimizers and a VQE baseline.

Every method starts from a residue sweep at ``t0`` (Hartree-Fock, ``t = 0``,
by default) and keeps one :class:`IterationRecord` per sweep, so the energy
measurements charged to the ledger can be recounted from the trace.

Methods
-------
standard     t += r / Delta_MP
approx_mnr   t += r / (E(0) - E_mu(0))            denominators frozen at t0
approx_nr    t += r / (E(t) - E_mu(t))
hybrid       standard while eta > 1/2, approx_nr afterwards
algorithm1   line-searched quasi-Newton on the residues with a BFGS-updated
             inverse Jacobian, started as 2I (gradient-like) or diagonal
vqe_bfgs     energy minimization, BFGS with Armijo backtracking
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields

import numpy as np

from .bounds import eta_from_sweep, practical_criterion
from .residues import MeasurementLedger, energy, energy_gradient, residue_direct, residue_sweep

METHODS = ("standard", "approx_mnr", "approx_nr", "hybrid", "algorithm1", "vqe_bfgs")

CONVERGED = "converged"
MAX_ITERS = "max_iters"
STALLED = "stalled"
DIVERGED = "diverged"
DEGENERATE = "degenerate"


class DegenerateDenominatorError(ArithmeticError):
    def __init__(self, index, label, value):
        super().__init__(f"denominator {value:.3e} for operator {index} ({label}) is below the guard")
        self.index = index
        self.label = label
        self.value = value


@dataclass
class OptimizerConfig:
    method: str = "algorithm1"
    epsilon: float = 1e-5
    eta_threshold: float = 1.0
    hybrid_threshold: float = 0.5
    tau_reset: float = 0.5
    armijo_c: float = 1e-4
    alpha_threshold: float = 1e-10
    denom_guard: float = 1e-6
    max_iters: int = 500
    linesearch_shrink: float = 0.5
    max_probes: int = 40
    gradient_tol: float = 1e-5
    # DIIS extrapolation is deliberately not provided
    diis: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {', '.join(METHODS)}")
        if not 0.0 < self.armijo_c < 1.0:
            raise ValueError("armijo_c must lie in (0, 1)")
        if not 0.0 < self.linesearch_shrink < 1.0:
            raise ValueError("linesearch_shrink must lie in (0, 1)")
        for name in ("epsilon", "eta_threshold", "hybrid_threshold", "tau_reset",
                     "alpha_threshold", "denom_guard", "gradient_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iters < 0 or self.max_probes < 1:
            raise ValueError("max_iters must be >= 0 and max_probes >= 1")
        if self.diis:
            raise NotImplementedError("DIIS acceleration is out of scope")

    @classmethod
    def from_dict(cls, values):
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown optimizer options: {', '.join(sorted(unknown))}")
        return cls(**values)


@dataclass
class IterationRecord:
    iter: int
    energy: float
    r_norm1: float
    r_norm2sq: float
    eta: float
    eps_TA: float
    alpha: float
    rule_used: str
    energy_evals: int
    sweeps: int = 0
    probes: int = 0
    energy_calls: int = 0
    gradients: int = 0
    grad_norm: float = math.nan
    t: np.ndarray = field(default=None, repr=False)

    CSV_FIELDS = ("iter", "energy", "r_norm1", "r_norm2sq", "eta", "eps_TA", "alpha",
                  "rule_used", "energy_evals", "sweeps", "probes", "energy_calls",
                  "gradients", "grad_norm")

    def as_row(self):
        return {name: getattr(self, name) for name in self.CSV_FIELDS}


@dataclass
class OptimizerState:
    t: np.ndarray
    r: np.ndarray
    energy: float
    e_mu: np.ndarray
    eta: float
    eps_TA: float
    H_inv: np.ndarray = None
    alpha_last: float = math.nan
    iter: int = 0


@dataclass
class Problem:
    """Hamiltonian, operator pool and the ledger that meters them."""

    hamiltonian: object
    pool: object
    ledger: MeasurementLedger = field(default_factory=MeasurementLedger)

    @property
    def N(self):
        return self.pool.N

    @property
    def sweep_cost(self):
        return 2 * self.pool.N + 1


@dataclass
class RunResult:
    method: str
    status: str
    t: np.ndarray
    energy: float
    trace: list
    energy_evals: int
    eta0: float
    eps_TA: float

    @property
    def converged(self):
        return self.status == CONVERGED

    @property
    def iterations(self):
        return max(0, len(self.trace) - 1)


# roundoff left by the three-energy residue formula at an exact fixed point
RESIDUE_NOISE = 64 * np.finfo(float).eps


def _criterion(r, e_init, e):
    cert = practical_criterion(r, e_init, e)
    if cert.valid:
        return cert.eps_t
    if np.max(np.abs(r), initial=0.0) <= RESIDUE_NOISE * max(1.0, abs(e)):
        return 0.0
    return math.inf


def _is_converged(state, config):
    return state.eps_TA < config.epsilon


def _record(problem, state, rule, alpha=math.nan, sweeps=1, probes=0, energy_calls=0):
    r = state.r
    return IterationRecord(
        iter=state.iter,
        energy=state.energy,
        r_norm1=float(np.sum(np.abs(r))),
        r_norm2sq=float(r @ r),
        eta=state.eta,
        eps_TA=state.eps_TA,
        alpha=alpha,
        rule_used=rule,
        energy_evals=problem.ledger.energy_evals,
        sweeps=sweeps,
        probes=probes,
        energy_calls=energy_calls,
        t=state.t.copy(),
    )


def _safe_eta(r, e_mu, e0):
    with np.errstate(divide="ignore", invalid="ignore"):
        eta = eta_from_sweep(r, e_mu, e0)
    return eta if math.isfinite(eta) else math.inf


def evaluate(problem, t, e_init=None, iteration=0):
    """Residue sweep at ``t`` packaged as an :class:`OptimizerState`."""
    t = np.array(t, dtype=float)
    sweep = residue_sweep(problem.hamiltonian, problem.pool, t, problem.ledger)
    e_init = sweep.energy if e_init is None else e_init
    return OptimizerState(
        t=t,
        r=np.asarray(sweep.r),
        energy=sweep.energy,
        e_mu=np.asarray(sweep.e_mu),
        eta=_safe_eta(sweep.r, sweep.e_mu, sweep.energy),
        eps_TA=_criterion(sweep.r, e_init, sweep.energy),
        iter=iteration,
    )


def _guarded(denoms, problem, config):
    small = np.flatnonzero(np.abs(denoms) < config.denom_guard)
    if small.size:
        k = int(small[0])
        raise DegenerateDenominatorError(k, problem.pool.ops[k].label, float(denoms[k]))
    return denoms


def _advance(problem, state, t_new, e_init):
    new = evaluate(problem, t_new, e_init, iteration=state.iter + 1)
    return new


def step_standard(problem, state, config, e_init):
    """``t_mu += r_mu / Delta_mu`` with Moller-Plesset denominators."""
    denoms = _guarded(problem.pool.delta_mp, problem, config)
    return _advance(problem, state, state.t + state.r / denoms, e_init)


def step_approx_mnr(problem, state, config, e_init, frozen_denoms):
    """``t_mu += r_mu / (E(t0) - E_mu(t0))``."""
    denoms = _guarded(np.asarray(frozen_denoms), problem, config)
    return _advance(problem, state, state.t + state.r / denoms, e_init)


def step_approx_nr(problem, state, config, e_init):
    """``t_mu += r_mu / (E(t) - E_mu(t))`` with the current sweep's energies."""
    denoms = _guarded(state.energy - state.e_mu, problem, config)
    return _advance(problem, state, state.t + state.r / denoms, e_init)


def step_hybrid(problem, state, config, e_init):
    """Standard rule while ``eta > hybrid_threshold``, approximate Newton after."""
    if state.eta > config.hybrid_threshold:
        return step_standard(problem, state, config, e_init), "mp"
    return step_approx_nr(problem, state, config, e_init), "diag"


def _finite(state):
    return bool(np.all(np.isfinite(state.t)) and math.isfinite(state.energy)
                and np.all(np.isfinite(state.r)))


def _result(method, status, problem, state, trace, eta0):
    return RunResult(method, status, state.t.copy(), state.energy, trace,
                     problem.ledger.energy_evals, eta0, state.eps_TA)


def run_fixed_point(problem, config, t0=None):
    """Drive one of the non-line-searched residue rules to convergence."""
    method = config.method
    t0 = np.zeros(problem.N) if t0 is None else np.asarray(t0, dtype=float)
    state = evaluate(problem, t0)
    e_init = state.energy
    trace = [_record(problem, state, "init")]
    eta0 = state.eta
    frozen = state.energy - state.e_mu
    status = MAX_ITERS
    while True:
        if _is_converged(state, config):
            status = CONVERGED
            break
        if state.iter >= config.max_iters:
            break
        try:
            if method == "standard":
                state, rule = step_standard(problem, state, config, e_init), "mp"
            elif method == "approx_mnr":
                state, rule = step_approx_mnr(problem, state, config, e_init, frozen), "diag0"
            elif method == "approx_nr":
                state, rule = step_approx_nr(problem, state, config, e_init), "diag"
            elif method == "hybrid":
                state, rule = step_hybrid(problem, state, config, e_init)
            else:
                raise ValueError(f"{method} is not a fixed-point rule")
        except DegenerateDenominatorError:
            status = DEGENERATE
            break
        trace.append(_record(problem, state, rule, alpha=1.0))
        if not _finite(state):
            status = DIVERGED
            break
    return _result(method, status, problem, state, trace, eta0)


def _diag_inverse(state):
    with np.errstate(divide="ignore"):
        return np.diag(1.0 / (state.e_mu - state.energy))


def bfgs_inverse_update(H, s, y):
    """Inverse-Hessian BFGS update; returns ``H`` unchanged when ``s.y <= 0``."""
    sy = float(s @ y)
    if not sy > 0:
        return H, False
    Hy = H @ y
    H_new = (H + (sy + y @ Hy) * np.outer(s, s) / sy**2
             - (np.outer(Hy, s) + np.outer(s, Hy)) / sy)
    return H_new, True


def _line_search(problem, t, direction, e_ref, descent, config):
    """Backtrack from ``alpha = 1`` until the Armijo decrease holds.

    Returns ``(alpha, E_trial, probes)``; ``alpha`` is ``None`` on stall.
    """
    alpha = 1.0
    probes = 0
    while True:
        trial = energy(problem.hamiltonian, problem.pool, t + alpha * direction)
        problem.ledger.charge("linesearch")
        probes += 1
        if trial < e_ref - config.armijo_c * alpha * descent:
            return alpha, trial, probes
        alpha *= config.linesearch_shrink
        if alpha < config.alpha_threshold or probes >= config.max_probes:
            return None, None, probes


def run_algorithm1(problem, config, t0=None):
    """Line-searched residue quasi-Newton iteration.

    The inverse-Jacobian guess starts as ``diag(1/(E_mu - E))`` when
    ``eta < eta_threshold`` and as ``2I`` otherwise; it is replaced by the
    diagonal form when ``eta`` first drops below the threshold, reset when
    a step moves further than ``tau_reset`` in 1-norm, and BFGS-updated
    otherwise. Each iteration costs one sweep plus the line-search probes.
    """
    n = problem.N
    t0 = np.zeros(n) if t0 is None else np.asarray(t0, dtype=float)
    state = evaluate(problem, t0)
    e_init = state.energy
    eta0 = state.eta
    trace = [_record(problem, state, "init")]
    if state.eta < config.eta_threshold:
        H, form = _diag_inverse(state), "diag"
    else:
        H, form = 2.0 * np.eye(n), "gradientlike"

    status = MAX_ITERS
    while True:
        if _is_converged(state, config):
            status = CONVERGED
            break
        if state.iter >= config.max_iters:
            break
        step = H @ state.r
        descent = float(step @ state.r)
        if not descent > 0 or not math.isfinite(descent):
            # only a positive-definite guess is guaranteed to descend
            H, form = 2.0 * np.eye(n), "gradientlike"
            step = H @ state.r
            descent = float(step @ state.r)
        alpha, _, probes = _line_search(problem, state.t, -step, state.energy, descent, config)
        if alpha is None:
            status = STALLED
            stall = _record(problem, state, form, sweeps=0, probes=probes)
            trace.append(stall)
            break
        new = evaluate(problem, state.t - alpha * step, e_init, iteration=state.iter + 1)
        new.alpha_last = alpha
        trace.append(_record(problem, new, form, alpha=alpha, probes=probes))
        s = new.t - state.t
        y = new.r - state.r
        if new.eta < config.eta_threshold and state.eta > config.eta_threshold:
            H, form = _diag_inverse(new), "diag"
        elif float(np.sum(np.abs(s))) > config.tau_reset:
            if new.eta < config.eta_threshold:
                H, form = _diag_inverse(new), "diag"
            else:
                H, form = 2.0 * np.eye(n), "gradientlike"
        else:
            H, updated = bfgs_inverse_update(H, s, y)
            if updated:
                form = "bfgs"
        state = new
        state.H_inv = H
        if not _finite(state):
            status = DIVERGED
            break
    return _result("algorithm1", status, problem, state, trace, eta0)


def run_vqe_bfgs(problem, config, t0=None):
    """Minimize ``E(t)`` with BFGS and Armijo backtracking.

    Gradients are exact; each costs ``2N + 1`` ledger entries. Stops when
    ``||grad E||_2 < gradient_tol``.
    """
    H_op, pool, ledger = problem.hamiltonian, problem.pool, problem.ledger
    n = problem.N
    t = np.zeros(n) if t0 is None else np.array(t0, dtype=float)
    e, g = energy_gradient(H_op, pool, t, ledger)
    e_init = e
    trace = []

    def record(it, alpha, probes, gradients):
        rec = IterationRecord(
            iter=it, energy=e, r_norm1=math.nan, r_norm2sq=math.nan, eta=math.nan,
            eps_TA=math.nan, alpha=alpha, rule_used="bfgs", energy_evals=ledger.energy_evals,
            probes=probes, gradients=gradients, grad_norm=float(np.linalg.norm(g)), t=t.copy(),
        )
        trace.append(rec)

    record(0, math.nan, 0, 1)
    Hinv = np.eye(n)
    status = MAX_ITERS
    it = 0
    while True:
        if np.linalg.norm(g) < config.gradient_tol:
            status = CONVERGED
            break
        if it >= config.max_iters:
            break
        d = -Hinv @ g
        slope = float(g @ d)
        if not slope < 0:
            Hinv = np.eye(n)
            d = -g
            slope = float(g @ d)
        alpha, _, probes = _line_search(problem, t, d, e, -slope, config)
        if alpha is None:
            status = STALLED
            record(it, math.nan, probes, 0)
            break
        t_new = t + alpha * d
        e_new, g_new = energy_gradient(H_op, pool, t_new, ledger)
        Hinv, _ = bfgs_inverse_update(Hinv, t_new - t, g_new - g)
        t, e, g = t_new, e_new, g_new
        it += 1
        record(it, alpha, probes, 1)
        if not (math.isfinite(e) and np.all(np.isfinite(t))):
            status = DIVERGED
            break
    r = residue_direct(H_op, pool, t)
    eps = _criterion(r, e_init, e)
    return RunResult("vqe_bfgs", status, t, e, trace, ledger.energy_evals, math.nan, eps)


def run(problem, config, t0=None):
    """Dispatch on ``config.method``."""
    if config.method == "algorithm1":
        return run_algorithm1(problem, config, t0)
    if config.method == "vqe_bfgs":
        return run_vqe_bfgs(problem, config, t0)
    return run_fixed_point(problem, config, t0)


def recount_energy_evals(trace, n_ops):
    """Ledger total implied by a trace: sweeps, probes, plain energies, gradients."""
    cost = 2 * n_ops + 1
    return sum(rec.sweeps * cost + rec.probes + rec.energy_calls + rec.gradients * cost
               for rec in trace)


def jacobian_fd(hamiltonian, pool, t, step=1e-5):
    """Central finite-difference Jacobian ``d r_mu / d t_nu`` of the residue map."""
    if not step > 0:
        raise ValueError("step must be positive")
    t = np.asarray(t, dtype=float)
    n = pool.N
    J = np.empty((n, n))
    for nu in range(n):
        e = np.zeros(n)
        e[nu] = step
        J[:, nu] = (residue_direct(hamiltonian, pool, t + e)
                    - residue_direct(hamiltonian, pool, t - e)) / (2 * step)
    return J


def jacobian_diag_approx(e_mu, e0):
    """``diag(E_mu - E)``, the diagonal-Hamiltonian Jacobian approximation."""
    return np.diag(np.asarray(e_mu) - e0)


def fit_convergence_rate(trace, t_final=None, floor=1e-8):
    """Rate ``gamma`` from a log-linear fit of ``||t_n - t_final||_1`` against ``n``.

    Points closer to ``t_final`` than ``floor`` (relative to the first
    distance) are dropped, since there the error of ``t_final`` itself
    dominates. Returns ``nan`` with fewer than two usable points.
    """
    ts = [rec.t for rec in trace if rec.t is not None and rec.sweeps]
    if len(ts) < 3:
        return math.nan
    t_final = ts[-1] if t_final is None else np.asarray(t_final)
    dist = np.array([np.sum(np.abs(t - t_final)) for t in ts[:-1]])
    if dist[0] <= 0:
        return math.nan
    keep = dist > floor * dist[0]
    n = np.flatnonzero(keep)
    if n.size < 2:
        return math.nan
    slope = np.polyfit(n, np.log(dist[keep]), 1)[0]
    return float(-slope)
