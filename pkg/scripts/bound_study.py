"""Per-iteration energy error and its estimates for one PQE run.

Writes a CSV with ``eps_exact``, the full-variance Temple estimate
``eps_T``, the practical pool estimate ``eps_TA``, the residue 1-norm and
the squared-overlap lower bound at every iterate. Defaults reproduce the
H4 / 0.75 A / complete-ansatz study.

    python scripts/bound_study.py [--fixture fixtures/h4_0.7500.fcidump] [--out bounds.csv]
"""

import argparse
import csv
import sys

from pqelab.ansatz import prepare_state
from pqelab.bounds import overlap_lower_bound
from pqelab.cli import load_system
from pqelab.exactdiag import solve
from pqelab.optimizers import METHODS, OptimizerConfig, Problem, run
from pqelab.residues import variance_full

FIELDS = ("iter", "energy", "eps_exact", "eps_T", "eps_TA", "r_norm1", "overlap", "overlap_lb")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--fixture", default="fixtures/h4_0.7500.fcidump")
    p.add_argument("--max-rank", type=int, default=4)
    p.add_argument("--method", default="standard", choices=METHODS)
    p.add_argument("--epsilon", type=float, default=1e-10)
    p.add_argument("--out", default="bounds.csv")
    args = p.parse_args(argv)

    sysm = load_system(args.fixture, args.max_rank)
    oracle = solve(sysm.hamiltonian)
    result = run(Problem(sysm.hamiltonian, sysm.pool), OptimizerConfig(method=args.method, epsilon=args.epsilon))
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, FIELDS, lineterminator="\n")
        writer.writeheader()
        for rec in result.trace:
            r2 = variance_full(sysm.hamiltonian, sysm.pool, rec.t)
            gap = oracle.e_es - rec.energy
            writer.writerow({
                "iter": rec.iter,
                "energy": rec.energy,
                "eps_exact": rec.energy - oracle.e_gs,
                "eps_T": r2 / gap if gap > 0 else "",
                "eps_TA": rec.eps_TA,
                "r_norm1": rec.r_norm1,
                "overlap": prepare_state(sysm.pool, rec.t).dot(oracle.gs_vector) ** 2,
                "overlap_lb": overlap_lower_bound(r2, rec.energy, oracle.e_gs, oracle.e_es),
            })
    print(f"{result.status} after {result.iterations} iterations; wrote {args.out}")
    return 0 if result.converged else 2


if __name__ == "__main__":
    sys.exit(main())
