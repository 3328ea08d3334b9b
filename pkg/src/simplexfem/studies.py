"""Convergence studies with manufactured solutions and assembly benchmarks."""
from __future__ import annotations

import math
import statistics
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .assembly import DENSE_LIMIT, assemble, assemble_standard_dense
from .errors import InvalidParameterError, TooLargeForDenseError
from .mesh import Mesh, generate
from .problems import Preset, apply_layout, get_preset
from .solver import Solution, SolveOptions, solve_poisson
from .system import average_value, error_norms, interpolate


@dataclass
class ConvergenceRow:
    h: float
    N: int
    NT: int
    l2_error: float
    h1_error: float
    l2_rate: Optional[float]
    h1_rate: Optional[float]
    cg_iters: int
    assemble_time: float
    solve_time: float


@dataclass
class ConvergenceReport:
    preset: str
    bc: str
    shape: str
    rows: list = field(default_factory=list)

    @property
    def final_l2_rate(self):
        return self.rows[-1].l2_rate

    @property
    def final_h1_rate(self):
        return self.rows[-1].h1_rate


def _rate(e_coarse, e_fine, h_coarse, h_fine):
    if e_fine <= 0 or e_coarse <= 0:
        return float("nan")
    return math.log(e_coarse / e_fine) / math.log(h_coarse / h_fine)


def solution_errors(mesh: Mesh, preset: Preset, sol: Solution, pure_neumann: bool):
    """L2 and H1-seminorm errors; pure-Neumann compares zero-mean representatives."""
    u_h = sol.u
    if pure_neumann:
        # u_h already has zero mean; give it the mean of the interpolated exact solution
        u_h = u_h + average_value(mesh, interpolate(mesh, preset.exact))
    return error_norms(mesh, u_h, preset.exact, preset.grad)


def run_convergence(
    preset_name: str,
    levels: Sequence[int],
    dim: int = 2,
    bc: Optional[str] = None,
    shape: Optional[str] = None,
    opts: SolveOptions = SolveOptions(),
    pin: int = 0,
) -> ConvergenceReport:
    """Solve on ``generate(shape, n)`` for each ``n`` in ``levels`` and tabulate rates.

    Rates are ``log(e_coarse / e_fine) / log(h_coarse / h_fine)``, i.e.
    ``log2`` of the error ratio when levels double.
    """
    preset = get_preset(preset_name, dim)
    bc = bc or preset.bc
    shape = shape or preset.shape
    report = ConvergenceReport(preset.name, bc, shape)
    prev = None
    for n in levels:
        mesh = apply_layout(generate(shape, n), bc)
        sol = solve_poisson(mesh, preset.problem(bc), opts, pin=pin)
        l2, h1 = solution_errors(mesh, preset, sol, bc == "pure-neumann")
        h = 1.0 / n
        if prev is None:
            l2_rate = h1_rate = None
        else:
            l2_rate = _rate(prev.l2_error, l2, prev.h, h)
            h1_rate = _rate(prev.h1_error, h1, prev.h, h)
        row = ConvergenceRow(h, mesh.n_nodes, mesh.n_elems, l2, h1, l2_rate, h1_rate,
                             sol.iterations, sol.timings["assemble"], sol.timings["solve"])
        report.rows.append(row)
        prev = row
    return report


# --------------------------------------------------------------------------
# benchmark


@dataclass
class BenchRow:
    strategy: str
    n: int
    N: int
    NT: int
    wall_time: float
    nnz: int
    memory_bytes: int


@dataclass
class BenchReport:
    shape: str
    rows: list = field(default_factory=list)
    time_exponent: dict = field(default_factory=dict)
    memory_exponent: dict = field(default_factory=dict)


def fit_exponent(sizes, values) -> float:
    """Slope of the least-squares line through ``(log size, log value)``."""
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if x.size < 2:
        return float("nan")
    return float(np.polyfit(x, y, 1)[0])


def _footprint(strategy, mesh, A):
    if strategy == "dense_oracle":
        return 8 * mesh.n_nodes**2
    return A.values.nbytes + A.row_idx.nbytes + A.col_ptr.nbytes


def run_bench(
    strategies: Sequence[str],
    sizes: Sequence[int],
    shape: str = "unit_square",
    repeat: int = 5,
) -> BenchReport:
    """Median-of-``repeat`` assembly wall times per strategy and mesh size.

    Before timing, every strategy is run once per mesh and the resulting
    ``nnz`` must agree.  ``memory_bytes`` is the storage of the assembled
    representation (``8 N^2`` for the dense oracle).
    """
    if repeat < 1:
        raise InvalidParameterError("repeat must be >= 1")
    report = BenchReport(shape)
    meshes = {n: generate(shape, n) for n in sizes}
    for n, mesh in meshes.items():
        if "dense_oracle" in strategies and mesh.n_nodes > DENSE_LIMIT:
            raise TooLargeForDenseError(
                f"dense_oracle requested at n={n} with N={mesh.n_nodes} > {DENSE_LIMIT}"
            )
    for n, mesh in meshes.items():
        nnz = {}
        built = {}
        for s in strategies:
            built[s] = assemble(mesh, s)
            nnz[s] = built[s].nnz
        # the dense oracle may keep round-off entries where the others cancel exactly
        sparse_nnz = {s: v for s, v in nnz.items() if s != "dense_oracle"}
        if len(set(sparse_nnz.values())) > 1:
            raise AssertionError(f"strategies disagree on nnz at n={n}: {nnz}")
        for s in strategies:
            run = (lambda: assemble_standard_dense(mesh)) if s == "dense_oracle" else (
                lambda s=s: assemble(mesh, s))
            times = []
            for _ in range(repeat):
                t0 = time.perf_counter()
                run()
                times.append(time.perf_counter() - t0)
            report.rows.append(BenchRow(s, n, mesh.n_nodes, mesh.n_elems,
                                        statistics.median(times), nnz[s],
                                        _footprint(s, mesh, built[s])))
    for s in strategies:
        rows = [r for r in report.rows if r.strategy == s]
        report.time_exponent[s] = fit_exponent([r.N for r in rows], [r.wall_time for r in rows])
        report.memory_exponent[s] = fit_exponent([r.N for r in rows], [r.memory_bytes for r in rows])
    return report
