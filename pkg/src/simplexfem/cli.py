"""Command-line interface: ``simplexfem {solve,convergence,bench,mesh-info}``.

Exit codes: 0 success, 1 runtime error, 2 usage error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .assembly import STRATEGIES
from .errors import FemError, InvalidParameterError
from .mesh import DIRICHLET, NEUMANN, ROBIN, boundary_faces, generate, read_mesh
from .problems import BOUNDARY_LAYOUTS, PRESET_NAMES, apply_layout, get_preset
from .quadrature import all_rules
from .solver import SolveOptions, solve_poisson
from .sparse import write_matrix_market
from .studies import run_bench, run_convergence, solution_errors

CSV_VERSION = 1
SHAPES = ("unit_square", "unit_cube", "lshape")


def _fmt(v) -> str:
    if v is None:
        return ""
    return f"{v:.17g}"


def _gen_spec(text):
    shape, _, n = text.partition(":")
    if shape not in SHAPES or not n.isdigit() or int(n) < 1:
        raise argparse.ArgumentTypeError(
            f"expected SHAPE:N with SHAPE in {', '.join(SHAPES)} and N >= 1, got {text!r}"
        )
    return shape, int(n)


def _load_mesh(args):
    if args.mesh is not None:
        return read_mesh(args.mesh)
    shape, n = args.gen
    return generate(shape, n)


def _add_mesh_source(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--mesh", type=Path, help="mesh file (text format)")
    g.add_argument("--gen", type=_gen_spec, metavar="SHAPE:N",
                   help="generated mesh, e.g. unit_square:8, unit_cube:4, lshape:4")


def _add_solver_options(p):
    p.add_argument("--tol", type=float, default=1e-10, help="CG relative residual tolerance")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--precond", choices=("auto", "none", "jacobi"), default="auto")
    p.add_argument("--method", choices=("cg", "dense_direct"), default="cg")


def _solve_options(args) -> SolveOptions:
    return SolveOptions(
        rel_tol=args.tol,
        max_iter=args.max_iter,
        preconditioner=None if args.precond == "auto" else args.precond,
        method=args.method,
    )


def cmd_solve(args) -> int:
    mesh = _load_mesh(args)
    preset = get_preset(args.problem, mesh.dim)
    if preset.dim != mesh.dim:
        raise InvalidParameterError(f"preset {args.problem!r} is {preset.dim}-D, mesh is {mesh.dim}-D")
    bc = args.bc or ("file" if args.mesh is not None else preset.bc)
    if bc != "file":
        mesh = apply_layout(mesh, bc)
    pure = bc == "pure-neumann" or not np.any(mesh.bd_flags == DIRICHLET)
    problem = preset.problem("pure-neumann" if pure else bc)
    sol = solve_poisson(mesh, problem, _solve_options(args), strategy=args.strategy, pin=args.pin)

    axes = ["x", "y", "z"][: mesh.dim]
    lines = [f"# simplexfem solution csv v{CSV_VERSION}", ",".join(["node", *axes, "u"])]
    for k, (xyz, val) in enumerate(zip(mesh.nodes.tolist(), sol.u.tolist()), start=1):
        lines.append(",".join([str(k), *(_fmt(c) for c in xyz), _fmt(val)]))
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if args.matrix is not None:
        write_matrix_market(sol.A, args.matrix, comment=f"stiffness matrix, N={mesh.n_nodes}")

    l2, h1 = solution_errors(mesh, preset, sol, pure)
    print(f"N = {mesh.n_nodes}")
    print(f"NT = {mesh.n_elems}")
    print(f"iterations = {sol.iterations}")
    print(f"residual = {sol.final_relres:.3e}")
    print(f"L2 error = {l2:.6e}")
    print(f"H1 error = {h1:.6e}")
    print(f"solution written to {args.out}")
    return 0


def _rate_str(r):
    return "   -  " if r is None else f"{r:6.3f}"


def cmd_convergence(args) -> int:
    report = run_convergence(args.problem, args.levels, dim=args.dim, bc=args.bc,
                             shape=args.shape, opts=_solve_options(args), pin=args.pin)
    print(f"preset={report.preset} bc={report.bc} shape={report.shape}")
    print(f"{'h':>10} {'N':>8} {'NT':>8} {'L2 error':>12} {'rate':>6} "
          f"{'H1 error':>12} {'rate':>6} {'iters':>6} {'t_asm':>8} {'t_solve':>8}")
    for r in report.rows:
        print(f"{r.h:10.5f} {r.N:8d} {r.NT:8d} {r.l2_error:12.4e} {_rate_str(r.l2_rate)} "
              f"{r.h1_error:12.4e} {_rate_str(r.h1_rate)} {r.cg_iters:6d} "
              f"{r.assemble_time:8.4f} {r.solve_time:8.4f}")
    if args.csv is not None:
        cols = ["h", "N", "NT", "l2_error", "h1_error", "l2_rate", "h1_rate", "cg_iters"]
        if args.timings:
            cols += ["assemble_time", "solve_time"]
        lines = [f"# simplexfem convergence csv v{CSV_VERSION} preset={report.preset} "
                 f"bc={report.bc} shape={report.shape}", ",".join(cols)]
        for r in report.rows:
            vals = []
            for c in cols:
                v = getattr(r, c)
                vals.append(str(v) if isinstance(v, int) else _fmt(v))
            lines.append(",".join(vals))
        Path(args.csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def cmd_bench(args) -> int:
    report = run_bench(args.strategies, args.sizes, shape=args.shape, repeat=args.repeat)
    print(f"{'strategy':>14} {'n':>5} {'N':>8} {'NT':>8} {'nnz':>9} {'time [s]':>11} {'bytes':>12}")
    for r in report.rows:
        print(f"{r.strategy:>14} {r.n:5d} {r.N:8d} {r.NT:8d} {r.nnz:9d} "
              f"{r.wall_time:11.6f} {r.memory_bytes:12d}")
    for s in args.strategies:
        print(f"{s}: time exponent {report.time_exponent[s]:.3f}, "
              f"memory exponent {report.memory_exponent[s]:.3f}")
    if args.csv is not None:
        lines = [f"# simplexfem bench csv v{CSV_VERSION} shape={report.shape} repeat={args.repeat}",
                 "strategy,n,N,NT,nnz,wall_time,memory_bytes"]
        lines += [f"{r.strategy},{r.n},{r.N},{r.NT},{r.nnz},{_fmt(r.wall_time)},{r.memory_bytes}"
                  for r in report.rows]
        Path(args.csv).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return 0


def cmd_mesh_info(args) -> int:
    if args.mesh is None and args.gen is None and not args.rules:
        raise argparse.ArgumentTypeError("mesh-info needs --mesh, --gen or --rules")
    if args.mesh is not None or args.gen is not None:
        mesh = _load_mesh(args)
        m = mesh.measures()
        print(f"dim = {mesh.dim}")
        print(f"N = {mesh.n_nodes}")
        print(f"NT = {mesh.n_elems}")
        print(f"NT/N = {mesh.n_elems / mesh.n_nodes:.6f}")
        print(f"min measure = {m.min():.6e}")
        print(f"max measure = {m.max():.6e}")
        print(f"total measure = {m.sum():.12g}")
        for name, flag in (("dirichlet", DIRICHLET), ("neumann", NEUMANN), ("robin", ROBIN)):
            print(f"{name} faces = {len(boundary_faces(mesh, flag))}")
    if args.rules:
        for r in all_rules():
            print(f"rule {r.name} dim={r.dim} order={r.order} points={r.n_points} "
                  f"weight_sum={r.weights.sum():.17g}")
            for lam, w in zip(r.points, r.weights):
                print("    " + " ".join(f"{v:.16f}" for v in lam) + f"   w={w:.16f}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="simplexfem",
                                     description="Linear finite elements for the Poisson equation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one problem and write the nodal solution as CSV")
    _add_mesh_source(p)
    p.add_argument("--problem", choices=PRESET_NAMES, default="sinsin")
    p.add_argument("--bc", choices=(*BOUNDARY_LAYOUTS, "file"), default=None,
                   help="boundary layout (default: the preset's; 'file' keeps mesh flags)")
    p.add_argument("--out", type=Path, default=Path("solution.csv"))
    p.add_argument("--matrix", type=Path, default=None, help="MatrixMarket dump of A")
    p.add_argument("--strategy", choices=STRATEGIES, default="blockwise")
    p.add_argument("--pin", type=int, default=0, help="pinned node for pure Neumann (0-based)")
    _add_solver_options(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("convergence", help="manufactured-solution convergence study")
    p.add_argument("--problem", choices=PRESET_NAMES, default="sinsin")
    p.add_argument("--levels", type=int, nargs="+", default=[8, 16, 32, 64])
    p.add_argument("--dim", type=int, choices=(2, 3), default=2)
    p.add_argument("--bc", choices=BOUNDARY_LAYOUTS, default=None)
    p.add_argument("--shape", choices=SHAPES, default=None)
    p.add_argument("--pin", type=int, default=0)
    p.add_argument("--csv", type=Path, default=None)
    p.add_argument("--timings", action="store_true", help="include timings in the CSV")
    _add_solver_options(p)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("bench", help="time the assembly strategies")
    p.add_argument("--strategies", nargs="+", choices=STRATEGIES, default=["blockwise", "triplet_loop"])
    p.add_argument("--sizes", type=int, nargs="+", default=[16, 32, 64, 128])
    p.add_argument("--shape", choices=SHAPES, default="unit_square")
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--csv", type=Path, default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("mesh-info", help="mesh statistics and quadrature tables")
    _add_mesh_source(p, required=False)
    p.add_argument("--rules", action="store_true", help="print every quadrature rule")
    p.set_defaults(func=cmd_mesh_info)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except argparse.ArgumentTypeError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except (FemError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
