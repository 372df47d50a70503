"""Measured against predicted convergence rates of the modified Newton rule.

For each fixture, runs the approximate modified Newton rule from Hartree-Fock,
fits ``gamma`` from ``log ||t_n - t_final||_1`` and compares it with
``gamma_lb = -log(1 - sqrt(1 - 2 eta_0))``.

    python scripts/rate_study.py [--molecules h4 h6 beh2] [--out rates.csv]
"""

import argparse
import csv
import glob
import sys
from pathlib import Path

from pqelab.bounds import nk_rate
from pqelab.cli import load_system
from pqelab.optimizers import OptimizerConfig, Problem, fit_convergence_rate, run

FIELDS = ("molecule", "distance_angstrom", "status", "iterations", "eta0", "gamma_fit", "gamma_lb")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--molecules", nargs="+", default=["h4", "h6", "beh2"])
    p.add_argument("--fixtures", default="fixtures")
    p.add_argument("--max-distance", type=float, default=1.5)
    p.add_argument("--epsilon", type=float, default=1e-12)
    p.add_argument("--out", default="rates.csv")
    args = p.parse_args(argv)
    rows = []
    for mol in args.molecules:
        for path in sorted(glob.glob(str(Path(args.fixtures) / f"{mol}_*.fcidump"))):
            sysm = load_system(path)
            d = sysm.metadata.get("bond_distance_angstrom")
            if d is None or d > args.max_distance:
                continue
            result = run(Problem(sysm.hamiltonian, sysm.pool),
                         OptimizerConfig(method="approx_mnr", epsilon=args.epsilon, max_iters=2000))
            rate = nk_rate(result.eta0)
            rows.append({
                "molecule": mol, "distance_angstrom": d, "status": result.status,
                "iterations": result.iterations, "eta0": result.eta0,
                "gamma_fit": fit_convergence_rate(result.trace) if result.converged else "",
                "gamma_lb": rate[1] if rate else "",
            })
            print(f"{mol} {d:5.2f} {result.status:9s} eta0={result.eta0:.3f} "
                  f"gamma={rows[-1]['gamma_fit']} lb={rows[-1]['gamma_lb']}")
    with open(args.out, "w", newline="") as fh:
        writer = csv.DictWriter(fh, FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
