"""Command-line experiment runner.

``pqelab run`` optimizes one FCIDUMP fixture and writes ``trace.csv`` and
``summary.json``. ``pqelab sweep`` does the same over a glob of fixtures
(one bond distance each) for one or more methods and writes a single
``sweep.csv`` table plus per-point traces.

Exit codes: 0 converged, 2 not converged, 3 line-search stall, 64 usage or
input error. A sweep exits 0 unless its arguments are unusable; per-point
failures are recorded in the table.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import glob
import io
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .ansatz import generate_pool
from .bounds import nk_rate, temple_certificate
from .exactdiag import solve
from .fock import SectorBasis, build_hamiltonian
from .integrals import FcidumpError, load_fcidump, load_sidecar
from .optimizers import (
    CONVERGED, METHODS, STALLED, IterationRecord, OptimizerConfig, Problem, fit_convergence_rate, run,
)
from .residues import variance_full

log = logging.getLogger("pqelab")

EXIT_CONVERGED = 0
EXIT_NOT_CONVERGED = 2
EXIT_STALLED = 3
EXIT_USAGE = 64

SWEEP_FIELDS = (
    "fixture", "method", "distance_angstrom", "E_final", "eps_exact", "eps_TA_final",
    "eps_T_full", "converged", "iterations", "energy_measurements", "gamma_fit",
    "gamma_lb", "status",
)

# rate fits are only meaningful for the fixed-point rules
_RATE_METHODS = ("standard", "approx_mnr", "approx_nr", "hybrid")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    fcidump_path: str = None
    max_rank: int = 2
    method: str = "algorithm1"
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    oracle: bool = True
    output_dir: str = "runs"
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.max_rank <= 4:
            raise UsageError("max_rank must be between 1 and 4")
        if self.optimizer.method != self.method:
            self.optimizer = dataclasses.replace(self.optimizer, method=self.method)

    def check_paths(self):
        if self.fcidump_path is None:
            raise UsageError("no FCIDUMP file given (use --fcidump)")
        if not Path(self.fcidump_path).is_file():
            raise UsageError(f"FCIDUMP file not found: {self.fcidump_path}")


@dataclass
class System:
    """Everything derived from one fixture."""

    integrals: object
    basis: SectorBasis
    hamiltonian: object
    pool: object
    metadata: dict


def load_system(path, max_rank=2):
    """Parse a fixture and build its sector Hamiltonian and operator pool."""
    ints = load_fcidump(path)
    basis = SectorBasis.build(ints.m, ints.n_electrons, ints.ms2)
    H = build_hamiltonian(ints, basis)
    pool = generate_pool(ints, basis, max_rank=max_rank)
    return System(ints, basis, H, pool, load_sidecar(path))


def _atomic_write(path, text):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(fields, rows):
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _cell(row.get(k)) for k in fields})
    return buf.getvalue()


def _cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return value


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    return value


def _exit_code(status):
    if status == CONVERGED:
        return EXIT_CONVERGED
    if status == STALLED:
        return EXIT_STALLED
    return EXIT_NOT_CONVERGED


def optimize(config, system=None):
    """Run one optimization; returns ``(system, result, summary dict)``."""
    if system is None:
        system = load_system(config.fcidump_path, config.max_rank)
    problem = Problem(system.hamiltonian, system.pool)
    result = run(problem, config.optimizer)
    summary = {
        "fixture": Path(config.fcidump_path).name if config.fcidump_path else None,
        "method": config.method,
        "max_rank": config.max_rank,
        "n_operators": system.pool.N,
        "sector_dim": system.basis.dim,
        "distance_angstrom": system.metadata.get("bond_distance_angstrom"),
        "status": result.status,
        "converged": result.converged,
        "iterations": result.iterations,
        "E_final": result.energy,
        "eps_TA_final": result.eps_TA,
        "eta0": result.eta0,
        "energy_measurements": result.energy_evals,
        "ledger": problem.ledger.breakdown(),
        "epsilon": config.optimizer.epsilon,
    }
    rate = nk_rate(result.eta0) if math.isfinite(result.eta0) and result.eta0 >= 0 else None
    summary["gamma_lb"] = rate[1] if rate else None
    summary["gamma_fit"] = (fit_convergence_rate(result.trace)
                            if config.method in _RATE_METHODS and result.converged else None)
    if config.oracle:
        oracle = solve(system.hamiltonian, k=min(6, system.basis.dim))
        r2 = variance_full(system.hamiltonian, system.pool, result.t)
        cert = temple_certificate(result.energy, r2, oracle.e_es)
        summary.update(
            E_gs=oracle.e_gs, E_es=oracle.e_es, eps_exact=result.energy - oracle.e_gs,
            eps_T_full=cert.eps_t if cert.valid else None, variance=r2,
        )
    return system, result, summary


def write_trace(path, trace):
    _atomic_write(path, _csv_text(IterationRecord.CSV_FIELDS, [rec.as_row() for rec in trace]))


def run_single(config):
    """Optimize one fixture, write ``trace.csv`` and ``summary.json``; return the exit code."""
    config.check_paths()
    _, result, summary = optimize(config)
    out = Path(config.output_dir)
    write_trace(out / "trace.csv", result.trace)
    _atomic_write(out / "summary.json", json.dumps(_json_safe(summary), indent=2, sort_keys=True) + "\n")
    log.info("%s: %s after %d iterations, E = %.12f, %d energy evaluations",
             summary["fixture"], result.status, result.iterations, result.energy, result.energy_evals)
    return _exit_code(result.status)


def _sweep_point(config):
    """One sweep row; never raises."""
    name = Path(config.fcidump_path).name
    row = {"fixture": name, "method": config.method}
    try:
        system, result, summary = optimize(config)
    except (FcidumpError, OSError, ArithmeticError, ValueError) as exc:
        row.update(status=f"error: {exc}", converged=False)
        return row, None
    for key in SWEEP_FIELDS[2:]:
        if key in summary:
            row[key] = summary[key]
    return row, result.trace


def _point_config(config, path, method):
    return dataclasses.replace(config, fcidump_path=str(path), method=method,
                               optimizer=dataclasses.replace(config.optimizer, method=method))


def run_sweep(config, fixture_glob, methods=None, jobs=1):
    """Run every ``(fixture, method)`` pair and write ``sweep.csv``; returns the rows."""
    methods = list(methods or [config.method])
    paths = sorted(glob.glob(fixture_glob))
    out = Path(config.output_dir)
    if not paths:
        log.warning("no fixtures match %r; writing an empty table", fixture_glob)
    points = [_point_config(config, p, m) for p in paths for m in methods]
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_sweep_point, points))
    else:
        outcomes = [_sweep_point(p) for p in points]
    rows = []
    for point, (row, trace) in zip(points, outcomes):
        if trace is not None:
            stem = Path(point.fcidump_path).stem
            write_trace(out / "traces" / f"{stem}__{point.method}.csv", trace)
        rows.append(row)
    _atomic_write(out / "sweep.csv", _csv_text(SWEEP_FIELDS, rows))
    return rows


def _parser():
    p = argparse.ArgumentParser(prog="pqelab", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("run", "sweep"):
        s = sub.add_parser(name)
        if name == "run":
            s.add_argument("--fcidump", help="FCIDUMP file (a .json sidecar is read if present)")
            s.add_argument("--method", choices=METHODS)
        else:
            s.add_argument("--fixtures", help="glob of FCIDUMP files, e.g. 'fixtures/h4_*.fcidump'")
            s.add_argument("--method", action="append",
                           help="optimizer; repeat or comma-separate for several")
            s.add_argument("--jobs", type=int, help="worker processes")
        s.add_argument("--config", help="JSON file of options; flags take precedence")
        s.add_argument("--max-rank", type=int)
        s.add_argument("--epsilon", type=float)
        s.add_argument("--eta-threshold", type=float)
        s.add_argument("--tau-reset", type=float)
        s.add_argument("--armijo-c", type=float)
        s.add_argument("--alpha-threshold", type=float)
        s.add_argument("--max-iters", type=int)
        s.add_argument("--oracle", choices=("on", "off"))
        s.add_argument("--out", help="output directory")
    return p


_OPT_FLAGS = ("epsilon", "eta_threshold", "tau_reset", "armijo_c", "alpha_threshold", "max_iters")


def _read_config_file(path):
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return data


def _split_methods(values):
    out = []
    for v in values or ():
        out.extend(m.strip() for m in v.split(",") if m.strip())
    return out


def build_config(args):
    """Merge a config file with command-line flags (flags win)."""
    data = _read_config_file(args.config) if args.config else {}
    opt = dict(data.pop("optimizer", {}))
    for key in list(data):
        if key in OptimizerConfig.__dataclass_fields__ and key != "method":
            opt[key] = data.pop(key)
    for key in _OPT_FLAGS:
        value = getattr(args, key, None)
        if value is not None:
            opt[key] = value
    methods = data.pop("methods", None) or data.pop("method", None)
    if isinstance(methods, str):
        methods = [methods]
    if args.command == "sweep":
        methods = _split_methods(args.method) or methods or ["algorithm1"]
    else:
        methods = [args.method] if args.method else (methods or ["algorithm1"])[:1]
    plain = {
        "fcidump_path": getattr(args, "fcidump", None) or data.pop("fcidump", None),
        "max_rank": args.max_rank if args.max_rank is not None else data.pop("max_rank", 2),
        "oracle": (args.oracle == "on") if args.oracle else bool(data.pop("oracle", True)),
        "output_dir": args.out or data.pop("out", "runs"),
        "seed": int(data.pop("seed", 0)),
    }
    fixtures = getattr(args, "fixtures", None) or data.pop("fixtures", None)
    jobs = getattr(args, "jobs", None) or int(data.pop("jobs", 1))
    data.pop("fcidump", None)
    if data:
        raise UsageError(f"unknown config keys: {', '.join(sorted(data))}")
    try:
        optimizer = OptimizerConfig.from_dict({**opt, "method": methods[0]})
        for m in methods[1:]:
            OptimizerConfig.from_dict({**opt, "method": m})
        config = RunConfig(method=methods[0], optimizer=optimizer, **plain)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from exc
    return config, methods, fixtures, jobs


def main(argv=None):
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONVERGED if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config, methods, fixtures, jobs = build_config(args)
        if args.command == "run":
            return run_single(config)
        if not fixtures:
            raise UsageError("no fixture glob given (use --fixtures)")
        if jobs < 1:
            raise UsageError("--jobs must be at least 1")
        run_sweep(config, fixtures, methods, jobs)
        return EXIT_CONVERGED
    except UsageError as exc:
        print(f"pqelab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FcidumpError, OSError) as exc:
        print(f"pqelab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
