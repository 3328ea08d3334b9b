"""Assembly timing for the three strategies on the unit square.

The dense oracle is only run on sizes within its guard; the sparse
strategies continue to the larger meshes.
"""
import argparse
import csv
from pathlib import Path

from simplexfem.assembly import DENSE_LIMIT
from simplexfem.mesh import generate
from simplexfem.studies import run_bench


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64, 128, 256])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--out", type=Path, default=Path("results"))
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    dense_sizes = [n for n in args.sizes if generate("unit_square", n).n_nodes <= DENSE_LIMIT]
    runs = [
        (["blockwise"], args.sizes),
        (["triplet_loop"], args.sizes[:4]),
        (["dense_oracle"], dense_sizes),
    ]
    rows = []
    for strategies, sizes in runs:
        if len(sizes) < 2:
            continue
        rep = run_bench(strategies, sizes, repeat=args.repeat)
        s = strategies[0]
        print(f"{s:>13}: time exponent {rep.time_exponent[s]:.3f}, "
              f"memory exponent {rep.memory_exponent[s]:.3f}")
        for r in rep.rows:
            print(f"{'':>15}n={r.n:4d} N={r.N:7d} nnz={r.nnz:8d} t={r.wall_time:.5f} s")
        rows += rep.rows

    path = args.out / "bench_unit_square.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["strategy", "n", "N", "NT", "nnz", "wall_time", "memory_bytes"])
        for r in rows:
            w.writerow([r.strategy, r.n, r.N, r.NT, r.nnz, repr(r.wall_time), r.memory_bytes])
    print(f"-> {path}")


if __name__ == "__main__":
    main()
