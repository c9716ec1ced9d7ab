"""Run the eigenvalue-sum regression grid and write one CSV row per verdict.

    python scripts/regression_grid.py --out results/regression_grid.csv
"""
import argparse
import csv
import sys
import time
from pathlib import Path

from magsum.verify import regression_grid


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--hbar", type=float, nargs="+", default=[0.5, 1.0])
    ap.add_argument("--beta", type=float, nargs="+", default=[0.0, 1.0, 5.0])
    ap.add_argument("--no-escalate", action="store_true")
    ap.add_argument("--out", type=Path, default=Path("results/regression_grid.csv"))
    args = ap.parse_args(argv)

    args.out.parent.mkdir(parents=True, exist_ok=True)
    header = ["hbar", "beta", "domain", "map", "sv_ratio", "bc", "n", "level", "lhs", "rhs", "margin",
              "budget", "status", "needs_strict"]
    bad = 0
    with args.out.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for hbar in args.hbar:
            for beta in args.beta:
                t0 = time.perf_counter()
                rows = regression_grid(hbar, beta, escalate=not args.no_escalate)
                for r in rows:
                    v = r.verdict
                    w.writerow([hbar, beta, r.domain, r.map_name, f"{r.singular_ratio:.6g}", v.bc, v.n, v.level,
                                repr(v.lhs), repr(v.rhs), repr(v.margin), repr(v.error_budget), v.status,
                                r.needs_strict])
                    bad += (not v.holds) or (r.needs_strict and not v.strict)
                escalated = sum(r.escalated for r in rows)
                print(f"hbar={hbar:g} beta={beta:g}: {len(rows)} verdicts, {escalated} escalated, "
                      f"{time.perf_counter() - t0:.1f}s", flush=True)
    print(f"{bad} verdicts failed; table in {args.out}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
