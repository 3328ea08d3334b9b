"""Manufactured-solution convergence tables for every preset and boundary layout.

Usage::

    python3 scripts/run_convergence.py --out results/
"""
import argparse
import csv
from pathlib import Path

from simplexfem.studies import run_convergence

STUDIES = [
    ("sinsin", "dirichlet", 2, [8, 16, 32, 64, 128]),
    ("mixed", "mixed", 2, [8, 16, 32, 64, 128]),
    ("neumann-pure", "pure-neumann", 2, [8, 16, 32, 64]),
    ("sinsin", "dirichlet", 3, [2, 4, 8, 16]),
]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("results"))
    parser.add_argument("--quick", action="store_true", help="drop the finest level of each study")
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    for preset, bc, dim, levels in STUDIES:
        if args.quick:
            levels = levels[:-1]
        rep = run_convergence(preset, levels, dim=dim, bc=bc)
        print(f"\n{preset} ({dim}-D, {bc})")
        print(f"{'n':>5} {'N':>8} {'L2':>11} {'rate':>6} {'H1':>11} {'rate':>6} {'iters':>6}")
        for n, r in zip(levels, rep.rows):
            l2r = "" if r.l2_rate is None else f"{r.l2_rate:.3f}"
            h1r = "" if r.h1_rate is None else f"{r.h1_rate:.3f}"
            print(f"{n:5d} {r.N:8d} {r.l2_error:11.4e} {l2r:>6} {r.h1_error:11.4e} {h1r:>6} {r.cg_iters:6d}")
        path = args.out / f"convergence_{preset}_{dim}d.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "h", "N", "NT", "l2_error", "h1_error", "l2_rate", "h1_rate", "cg_iters"])
            for n, r in zip(levels, rep.rows):
                w.writerow([n, repr(r.h), r.N, r.NT, repr(r.l2_error), repr(r.h1_error),
                            "" if r.l2_rate is None else repr(r.l2_rate),
                            "" if r.h1_rate is None else repr(r.h1_rate), r.cg_iters])
        print(f"-> {path}")


if __name__ == "__main__":
    main()
