"""Projective quantum eigensolver amplitude optimization on a classical state-vector simulator."""

from .ansatz import OperatorPool, generate_pool, prepare_state
from .bounds import EnergyCertificate, nk_rate, practical_criterion, temple_bracket
from .exactdiag import SpectralOracle, solve
from .fock import SectorBasis, SparseHamiltonian, StateVector, build_hamiltonian
from .integrals import SpinOrbitalIntegrals, load_fcidump, parse_fcidump
from .optimizers import OptimizerConfig, Problem, RunResult, run
from .residues import MeasurementLedger, residue_direct, residue_sweep

__all__ = [
    "EnergyCertificate", "MeasurementLedger", "OperatorPool", "OptimizerConfig", "Problem",
    "RunResult", "SectorBasis", "SparseHamiltonian", "SpectralOracle", "SpinOrbitalIntegrals",
    "StateVector", "build_hamiltonian", "generate_pool", "load_fcidump", "nk_rate",
    "parse_fcidump", "practical_criterion", "prepare_state", "residue_direct", "residue_sweep",
    "run", "solve", "temple_bracket",
]
