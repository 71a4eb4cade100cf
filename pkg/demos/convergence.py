"""Convergence studies: errors against a fine reference run.

Each study halves the time step (or the spacing) four times, runs a finer
reference and prints the L2 position errors with their observed rates
log2(e_{i-1} / e_i).  Levels run in parallel worker processes; set
``SIM_THREADS`` to limit them.

Run with ``python demos/convergence.py conv3d-surface time``.
"""

import argparse

from mvfluid.app import run_builtin_study
from mvfluid.scenarios import STUDIES


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("name", choices=sorted({n for n, _ in STUDIES}))
    parser.add_argument("axis", choices=("time", "space"))
    args = parser.parse_args()
    study = run_builtin_study(args.name, args.axis)
    print(study.report.table())


if __name__ == "__main__":
    main()
