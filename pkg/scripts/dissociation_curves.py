"""Energy error and measurement cost along dissociation curves.

Runs the sweep command for each molecule with the method set used in the
comparisons (standard / hybrid / approximate Newton, and algorithm1 against
standard and VQE) and leaves one ``sweep.csv`` per molecule under ``--out``.

    python scripts/dissociation_curves.py [--molecules h4 lih] [--jobs 8]
"""

import argparse
import os
import sys
from pathlib import Path

from pqelab.cli import main as cli_main

METHODS = {
    "h4": "standard,hybrid,approx_nr,algorithm1,vqe_bfgs",
    "h6": "standard,hybrid,approx_nr,algorithm1,vqe_bfgs",
    "lih": "standard,algorithm1,vqe_bfgs",
    "beh2": "standard,hybrid,approx_nr,algorithm1,vqe_bfgs",
}


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--molecules", nargs="+", default=sorted(METHODS), choices=sorted(METHODS))
    p.add_argument("--fixtures", default="fixtures")
    p.add_argument("--epsilon", default="1e-5")
    p.add_argument("--jobs", default=str(os.cpu_count() or 1))
    p.add_argument("--out", default="curves")
    args = p.parse_args(argv)
    status = 0
    for mol in args.molecules:
        code = cli_main([
            "sweep", "--fixtures", str(Path(args.fixtures) / f"{mol}_*.fcidump"),
            "--method", METHODS[mol], "--epsilon", args.epsilon, "--jobs", args.jobs,
            "--out", str(Path(args.out) / mol),
        ])
        print(f"{mol}: {Path(args.out) / mol / 'sweep.csv'}")
        status = status or code
    return status


if __name__ == "__main__":
    sys.exit(main())
