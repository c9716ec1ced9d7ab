"""Ground-state energies against field strength, with the Landau level ħ|β| for reference.

    python scripts/ground_state_vs_field.py --domain square --out results/ground_state.csv
"""
import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from magsum.geometry import builtin
from magsum.operator import Dirichlet, Neumann, Robin
from magsum.verify import seed_mesh, solve


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--domain", default="square")
    ap.add_argument("--level", type=int, default=4)
    ap.add_argument("--hbar", type=float, default=1.0)
    ap.add_argument("--betas", type=float, nargs=3, default=[0.0, 40.0, 41], metavar=("START", "STOP", "COUNT"))
    ap.add_argument("--out", type=Path, default=Path("results/ground_state.csv"))
    args = ap.parse_args(argv)

    m = seed_mesh(builtin(args.domain), args.level)
    betas = np.linspace(args.betas[0], args.betas[1], int(args.betas[2]))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with args.out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["beta", "landau", "dirichlet", "robin_1", "neumann"])
        for beta in betas:
            vals = [solve(m, args.hbar, beta, bc, 1).eigenvalues[0] for bc in (Dirichlet(), Robin(1.0), Neumann())]
            w.writerow([repr(float(beta)), repr(args.hbar * abs(beta))] + [repr(float(v)) for v in vals])
            print(f"beta={beta:6.2f}  landau={args.hbar * abs(beta):8.3f}  "
                  f"lambda1={vals[0]:9.4f}  rho1={vals[1]:9.4f}  mu1={vals[2]:9.4f}", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
