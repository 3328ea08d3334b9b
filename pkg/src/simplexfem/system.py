"""Right-hand side, boundary conditions and error norms for the Poisson problem

    -Laplace(u) = f in Omega,   u = g_D on Gamma_D,   grad(u).n = g_N on Gamma_N.

Field callables take an ``(M, d)`` array of points and return ``M`` values
(``grad_exact`` returns an ``(M, d)`` array).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .assembly import barycentric_gradients
from .errors import NoDirichletBoundaryError, UnsupportedBoundaryTypeError
from .mesh import DIRICHLET, NEUMANN, ROBIN, FaceList, Mesh, boundary_faces
from .quadrature import TET4_A, TET4_B, rule
from .sparse import CscMatrix, accumulate, matvec

Field = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PoissonProblem:
    f: Field
    g_D: Optional[Field] = None
    g_N: Optional[Field] = None
    pure_neumann: bool = False


@dataclass(frozen=True)
class BoundaryPartition:
    dirichlet_nodes: np.ndarray
    free_nodes: np.ndarray
    dirichlet_faces: FaceList
    neumann_faces: FaceList


def _eval(field, points):
    return np.broadcast_to(np.asarray(field(points), dtype=float), (points.shape[0],))


def assemble_load(mesh: Mesh, f: Field) -> np.ndarray:
    """Load vector ``b_i = int f phi_i``.

    2-D uses the edge-midpoint rule (``phi_i`` vanishes at the midpoint
    opposite vertex ``i``); 3-D applies the four-point rule to ``f phi_i``.
    """
    nodes, elems = mesh.nodes, mesh.elems
    measure = mesh.measures()
    if mesh.dim == 2:
        mid1 = (nodes[elems[:, 1]] + nodes[elems[:, 2]]) / 2
        mid2 = (nodes[elems[:, 2]] + nodes[elems[:, 0]]) / 2
        mid3 = (nodes[elems[:, 0]] + nodes[elems[:, 1]]) / 2
        f1, f2, f3 = _eval(f, mid1), _eval(f, mid2), _eval(f, mid3)
        bt = [measure * (f2 + f3) / 6, measure * (f3 + f1) / 6, measure * (f1 + f2) / 6]
    else:
        qr = rule(3, "tet4")
        fq = [_eval(f, np.einsum("k,tkd->td", lam, nodes[elems])) for lam in qr.points]
        total = fq[0] + fq[1] + fq[2] + fq[3]
        # lambda_i is TET4_A at point i and TET4_B at the other three; weights 1/4
        bt = [measure * (TET4_A * fq[i] + TET4_B * (total - fq[i])) / 4 for i in range(4)]
    return accumulate(elems.T.ravel(), np.concatenate(bt), mesh.n_nodes)


def apply_neumann(b, mesh: Mesh, g_N: Optional[Field]) -> np.ndarray:
    """Add ``int_{Gamma_N} g_N phi_i`` by the one-point (midpoint/barycenter) rule."""
    b = np.asarray(b, dtype=float)
    faces = boundary_faces(mesh, NEUMANN).faces
    if g_N is None or faces.shape[0] == 0:
        return b.copy()
    pts = mesh.nodes[faces]
    if mesh.dim == 2:
        size = np.linalg.norm(pts[:, 0] - pts[:, 1], axis=1)
        share = size * _eval(g_N, pts.mean(axis=1)) / 2
    else:
        size = np.linalg.norm(np.cross(pts[:, 1] - pts[:, 0], pts[:, 2] - pts[:, 0]), axis=1) / 2
        share = size * _eval(g_N, pts.mean(axis=1)) / 3
    return b + accumulate(faces.T.ravel(), np.tile(share, mesh.dim), mesh.n_nodes)


def check_supported(mesh: Mesh) -> None:
    if np.any(mesh.bd_flags == ROBIN):
        raise UnsupportedBoundaryTypeError("Robin boundary faces (flag 3) are not supported")


def boundary_partition(mesh: Mesh) -> BoundaryPartition:
    check_supported(mesh)
    dirichlet = boundary_faces(mesh, DIRICHLET)
    is_bd = np.zeros(mesh.n_nodes, dtype=bool)
    is_bd[dirichlet.faces.ravel()] = True
    return BoundaryPartition(
        dirichlet_nodes=np.flatnonzero(is_bd),
        free_nodes=np.flatnonzero(~is_bd),
        dirichlet_faces=dirichlet,
        neumann_faces=boundary_faces(mesh, NEUMANN),
    )


def apply_dirichlet(A: CscMatrix, b, mesh: Mesh, g_D: Optional[Field]):
    """Lift the Dirichlet data: returns ``(u0, b - A u0, partition)``.

    ``A`` is left untouched; the reduced system lives on ``partition.free_nodes``.
    """
    partition = boundary_partition(mesh)
    if partition.dirichlet_nodes.size == 0:
        raise NoDirichletBoundaryError("mesh has no Dirichlet faces")
    u0 = np.zeros(mesh.n_nodes)
    bd = partition.dirichlet_nodes
    if g_D is not None:
        u0[bd] = _eval(g_D, mesh.nodes[bd])
    b_mod = np.asarray(b, dtype=float) - matvec(A, u0)
    return u0, b_mod, partition


def enforce_compatibility(b) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    return b - np.mean(b)


def average_value(mesh: Mesh, u) -> float:
    """Mean of the piecewise-linear ``u`` over the domain."""
    area = mesh.measures()
    return float(np.sum(np.mean(np.asarray(u)[mesh.elems], axis=1) * area) / np.sum(area))


def zero_average_shift(mesh: Mesh, u) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    return u - average_value(mesh, u)


def interpolate(mesh: Mesh, field: Field) -> np.ndarray:
    return _eval(field, mesh.nodes).copy()


def error_norms(mesh: Mesh, u_h, u_exact: Field, grad_exact: Field):
    """``(||u_h - u||_L2, |u_h - u|_H1)`` with an order-2 rule per element."""
    qr = rule(2, "midpoint_edges") if mesh.dim == 2 else rule(3, "tet4")
    u_h = np.asarray(u_h, dtype=float)
    grads, measure = barycentric_gradients(mesh)
    local_u = u_h[mesh.elems]
    grad_h = np.einsum("tdk,tk->td", grads, local_u)
    corners = mesh.nodes[mesh.elems]
    l2 = np.zeros(mesh.n_elems)
    h1 = np.zeros(mesh.n_elems)
    for lam, w in zip(qr.points, qr.weights):
        pts = np.einsum("k,tkd->td", lam, corners)
        diff = local_u @ lam - _eval(u_exact, pts)
        l2 += w * diff**2
        gdiff = grad_h - np.asarray(grad_exact(pts), dtype=float).reshape(grad_h.shape)
        h1 += w * np.einsum("td,td->t", gdiff, gdiff)
    return float(np.sqrt(np.sum(measure * l2))), float(np.sqrt(np.sum(measure * h1)))
