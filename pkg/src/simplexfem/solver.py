"""Linear solves for the reduced free-node system and the full Poisson driver."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .assembly import DENSE_LIMIT, assemble
from .errors import (
    InvalidParameterError,
    MaxIterExceededError,
    NoDirichletBoundaryError,
    NotPositiveDefiniteError,
    ShapeMismatchError,
    TooLargeForDenseError,
)
from .mesh import Mesh
from .sparse import CscMatrix, submatrix
from .system import (
    BoundaryPartition,
    PoissonProblem,
    apply_dirichlet,
    apply_neumann,
    assemble_load,
    boundary_partition,
    check_supported,
    enforce_compatibility,
    zero_average_shift,
)

# Jacobi switches on automatically from this many unknowns (about a 32 x 32 grid).
AUTO_JACOBI_SIZE = 32 * 32


@dataclass(frozen=True)
class SolveOptions:
    rel_tol: float = 1e-10
    max_iter: Optional[int] = None  # None -> 10 * system size
    preconditioner: Optional[str] = None  # "none", "jacobi", or None for automatic
    method: str = "cg"  # "cg" or "dense_direct"

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise InvalidParameterError(f"rel_tol must be positive, got {self.rel_tol}")
        if self.max_iter is not None and self.max_iter < 1:
            raise InvalidParameterError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.preconditioner not in (None, "none", "jacobi"):
            raise InvalidParameterError(f"unknown preconditioner {self.preconditioner!r}")
        if self.method not in ("cg", "dense_direct"):
            raise InvalidParameterError(f"unknown method {self.method!r}")


@dataclass
class Solution:
    u: np.ndarray
    iterations: int
    final_relres: float
    partition: BoundaryPartition
    A: Optional[CscMatrix] = None
    timings: dict = field(default_factory=dict)


def cg_solve(A, b, opts: SolveOptions = SolveOptions()):
    """Preconditioned conjugate gradients for SPD ``A``.

    Returns ``(x, iterations, relres)`` with ``relres = |b - A x| / |b|``.
    Raises :class:`MaxIterExceededError` carrying the best iterate when the
    tolerance is not met within ``max_iter`` steps.
    """
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if A.shape != (n, n):
        raise ShapeMismatchError(f"A is {A.shape}, b has length {n}")
    norm_b = np.linalg.norm(b)
    if norm_b == 0.0:
        return np.zeros(n), 0, 0.0
    max_iter = opts.max_iter if opts.max_iter is not None else 10 * n
    precond = opts.preconditioner
    if precond is None:
        precond = "jacobi" if n >= AUTO_JACOBI_SIZE else "none"
    if precond == "jacobi":
        diag = A.diagonal() if isinstance(A, CscMatrix) else np.diag(np.asarray(A))
        if np.any(diag <= 0):
            raise NotPositiveDefiniteError("non-positive diagonal entry; Jacobi needs SPD A")
        inv_diag = 1.0 / diag
    else:
        inv_diag = None

    x = np.zeros(n)
    r = b.copy()
    z = r * inv_diag if inv_diag is not None else r
    p = z.copy()
    rz = r @ z
    best_x, best_res = x.copy(), 1.0
    for k in range(1, max_iter + 1):
        Ap = A @ p
        pAp = p @ Ap
        if pAp <= 0:
            raise NotPositiveDefiniteError(f"p.Ap = {pAp:.3g} <= 0 at iteration {k}")
        alpha = rz / pAp
        x = x + alpha * p
        r = r - alpha * Ap
        relres = np.linalg.norm(r) / norm_b
        if relres < best_res:
            best_x, best_res = x.copy(), relres
        if relres <= opts.rel_tol:
            true_res = np.linalg.norm(b - A @ x) / norm_b
            return x, k, float(true_res)
        z = r * inv_diag if inv_diag is not None else r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    best_true = float(np.linalg.norm(b - A @ best_x) / norm_b)
    raise MaxIterExceededError(best_x, max_iter, best_true)


def cholesky(A) -> np.ndarray:
    """Lower-triangular ``L`` with ``A = L L^T``; column-by-column elimination."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        s = A[j, j] - L[j, :j] @ L[j, :j]
        if not s > 0:
            raise NotPositiveDefiniteError(f"non-positive pivot {s:.3g} in column {j}")
        L[j, j] = np.sqrt(s)
        L[j + 1:, j] = (A[j + 1:, j] - L[j + 1:, :j] @ L[j, :j]) / L[j, j]
    return L


def dense_direct_solve(A, b) -> np.ndarray:
    if isinstance(A, CscMatrix):
        if A.m > DENSE_LIMIT:
            raise TooLargeForDenseError(f"dense solve limited to N <= {DENSE_LIMIT}, got {A.m}")
        A = A.to_dense()
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = b.shape[0]
    if A.shape != (n, n):
        raise ShapeMismatchError(f"A is {A.shape}, b has length {n}")
    if n > DENSE_LIMIT:
        raise TooLargeForDenseError(f"dense solve limited to N <= {DENSE_LIMIT}, got {n}")
    L = cholesky(A)
    y = np.zeros(n)
    for i in range(n):
        y[i] = (b[i] - L[i, :i] @ y[:i]) / L[i, i]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (y[i] - L[i + 1:, i] @ x[i + 1:]) / L[i, i]
    return x


def solve_poisson(
    mesh: Mesh,
    problem: PoissonProblem,
    opts: SolveOptions = SolveOptions(),
    strategy: str = "blockwise",
    pin: int = 0,
) -> Solution:
    """Assemble and solve; pure-Neumann meshes pin node ``pin`` and shift to zero mean."""
    check_supported(mesh)
    t0 = time.perf_counter()
    A = assemble(mesh, strategy)
    b = assemble_load(mesh, problem.f)
    b = apply_neumann(b, mesh, problem.g_N)
    t1 = time.perf_counter()

    pure = problem.pure_neumann
    if not pure:
        try:
            u, b, partition = apply_dirichlet(A, b, mesh, problem.g_D)
        except NoDirichletBoundaryError:
            pure = True
    if pure:
        if not 0 <= pin < mesh.n_nodes:
            raise InvalidParameterError(f"pin node {pin} outside [0, {mesh.n_nodes})")
        b = enforce_compatibility(b)
        u = np.zeros(mesh.n_nodes)
        base = boundary_partition(mesh)
        partition = BoundaryPartition(
            dirichlet_nodes=np.zeros(0, dtype=np.int64),
            free_nodes=np.delete(np.arange(mesh.n_nodes), pin),
            dirichlet_faces=base.dirichlet_faces,
            neumann_faces=base.neumann_faces,
        )

    free = partition.free_nodes
    iterations, relres = 0, 0.0
    if free.size:
        A_free = submatrix(A, free, free)
        rhs = b[free]
        if opts.method == "dense_direct":
            x = dense_direct_solve(A_free, rhs)
            norm_rhs = np.linalg.norm(rhs)
            relres = float(np.linalg.norm(rhs - A_free @ x) / norm_rhs) if norm_rhs else 0.0
        else:
            x, iterations, relres = cg_solve(A_free, rhs, opts)
        u[free] = x
    if pure:
        u = zero_average_shift(mesh, u)
    t2 = time.perf_counter()
    return Solution(u, iterations, relres, partition, A,
                    {"assemble": t1 - t0, "solve": t2 - t1})
