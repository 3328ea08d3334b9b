"""Stiffness matrix assembly for linear Lagrange elements.

Three strategies build the same matrix ``a_ij = int grad(phi_j) . grad(phi_i)``
and serve as cross-checks for each other:

``dense_oracle``
    element loop, reference-map local matrices added entry by entry into a
    dense ``N x N`` array (guarded to ``N <= DENSE_LIMIT``).
``triplet_loop``
    element loop recording ``(d+1)**2`` triplets per element, followed by a
    single :func:`~simplexfem.sparse.from_triplets` call.
``blockwise``
    scaled face normals for all elements at once; triplets are filled one
    ``(i, j)`` local pair at a time in ``NT``-long slices.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateElementError, InvalidParameterError, TooLargeForDenseError
from .mesh import DEGENERATE_RTOL, LOCAL_FACES, Mesh
from .quadrature import small_det
from .sparse import CscMatrix, Triplets, from_dense, from_triplets

DENSE_LIMIT = 2000
STRATEGIES = ("dense_oracle", "triplet_loop", "blockwise")


@dataclass(frozen=True)
class LocalStiffness:
    entries: np.ndarray
    measure: float


def _check_simplex(vertices):
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] not in (2, 3) or v.shape[0] != v.shape[1] + 1:
        raise InvalidParameterError(f"expected (d+1) x d vertices for d = 2, 3; got {v.shape}")
    return v


def _longest_edge(v):
    return max(np.linalg.norm(v[b] - v[a]) for a in range(len(v)) for b in range(a + 1, len(v)))


def local_stiffness_reference(vertices) -> LocalStiffness:
    """Local matrix through the affine map from the reference simplex.

    With ``B`` holding the rows ``x_i - x_{d+1}``, the gradients of the
    barycentric coordinates are ``B^{-1} G`` where ``G = [I | -1]``.
    """
    v = _check_simplex(vertices)
    d = v.shape[1]
    B = v[:d] - v[d]
    measure = abs(small_det(B)) / math.factorial(d)
    if measure < DEGENERATE_RTOL * _longest_edge(v) ** d:
        raise DegenerateElementError(f"degenerate simplex, measure {measure:.3g}")
    G = np.hstack([np.eye(d), -np.ones((d, 1))])
    grads = np.linalg.solve(B, G)
    At = np.empty((d + 1, d + 1))
    for i in range(d + 1):
        for j in range(d + 1):
            At[i, j] = measure * np.dot(grads[:, i], grads[:, j])
    return LocalStiffness(At, measure)


def edge_vectors_2d(nodes, elems):
    """Edge vectors ``ve[:, :, i]`` opposite vertex ``i`` and unsigned areas."""
    ve = np.empty((elems.shape[0], 2, 3))
    ve[:, :, 2] = nodes[elems[:, 1]] - nodes[elems[:, 0]]
    ve[:, :, 0] = nodes[elems[:, 2]] - nodes[elems[:, 1]]
    ve[:, :, 1] = nodes[elems[:, 0]] - nodes[elems[:, 2]]
    area = 0.5 * np.abs(-ve[:, 0, 2] * ve[:, 1, 1] + ve[:, 1, 2] * ve[:, 0, 1])
    return ve, area


def face_normals_3d(nodes, elems):
    """Scaled inward normals ``normal[:, :, i]`` of the face opposite vertex ``i``, and signed volumes."""
    nt = elems.shape[0]
    face = np.concatenate([elems[:, f] for f in LOCAL_FACES[3]])
    v12 = nodes[face[:, 1]] - nodes[face[:, 0]]
    v13 = nodes[face[:, 2]] - nodes[face[:, 0]]
    all_normal = np.cross(v12, v13)
    normal = np.stack([all_normal[k * nt:(k + 1) * nt] for k in range(4)], axis=2)
    v12, v13 = v12[3 * nt:], v13[3 * nt:]
    v14 = nodes[elems[:, 3]] - nodes[elems[:, 0]]
    volume = _rowdot(np.cross(v12, v13), v14) / 6
    return normal, volume


def _rowdot(a, b):
    return np.einsum("ij,ij->i", a, b)


def local_stiffness_normals(vertices) -> LocalStiffness:
    """Local matrix from scaled normals: ``a_ij = n_i . n_j / (d!^2 |tau|)``."""
    v = _check_simplex(vertices)
    d = v.shape[1]
    elems = np.arange(d + 1)[None, :]
    if d == 2:
        vecs, measure = edge_vectors_2d(v, elems)
        divisor = 4 * measure
    else:
        vecs, measure = face_normals_3d(v, elems)
        # a negatively ordered tet flips every normal; products are unchanged
        measure = np.abs(measure)
        divisor = 36 * measure
    if measure[0] < DEGENERATE_RTOL * _longest_edge(v) ** d:
        raise DegenerateElementError(f"degenerate simplex, measure {measure[0]:.3g}")
    At = np.empty((d + 1, d + 1))
    for i in range(d + 1):
        for j in range(d + 1):
            At[i, j] = (_rowdot(vecs[:, :, i], vecs[:, :, j]) / divisor)[0]
    return LocalStiffness(At, float(measure[0]))


def assemble_standard_dense(mesh: Mesh) -> np.ndarray:
    n = mesh.n_nodes
    if n > DENSE_LIMIT:
        raise TooLargeForDenseError(f"dense assembly limited to N <= {DENSE_LIMIT}, got N = {n}")
    A = np.zeros((n, n))
    k = mesh.dim + 1
    for elem in mesh.elems:
        At = local_stiffness_reference(mesh.nodes[elem]).entries
        for i in range(k):
            for j in range(k):
                A[elem[i], elem[j]] += At[i, j]
    return A


def assemble_triplets(mesh: Mesh) -> CscMatrix:
    """Element loop recording ``(d+1)^2`` triplets per element, then one CSC build.

    Local matrices come from the scaled-normal formula so the triplet multiset
    equals the blockwise one; only the emission order differs.
    """
    k = mesh.dim + 1
    nt = mesh.n_elems
    ii = np.zeros(k * k * nt, dtype=np.int64)
    jj = np.zeros(k * k * nt, dtype=np.int64)
    ss = np.zeros(k * k * nt)
    index = 0
    for elem in mesh.elems:
        At = local_stiffness_normals(mesh.nodes[elem]).entries
        ii[index:index + k * k] = np.repeat(elem, k)
        jj[index:index + k * k] = np.tile(elem, k)
        ss[index:index + k * k] = At.ravel()
        index += k * k
    return from_triplets(Triplets(ii, jj, ss, mesh.n_nodes, mesh.n_nodes))


def blockwise_triplets(mesh: Mesh, symmetric: bool = False) -> Triplets:
    """Triplets of the vectorized strategy, in ``(i, j)``-block order.

    ``symmetric=True`` computes only blocks with ``j >= i``; each off-diagonal
    block is emitted together with its mirror, interleaved element by element.
    That keeps the summation order of entry ``(r, c)`` equal to that of
    ``(c, r)``, so the assembled matrix is bitwise symmetric.
    """
    nodes, elems = mesh.nodes, mesh.elems
    nt, k = elems.shape
    if mesh.dim == 2:
        vecs, measure = edge_vectors_2d(nodes, elems)
        divisor = 4 * measure
    else:
        vecs, measure = face_normals_3d(nodes, elems)
        divisor = 36 * measure
    pairs = [(i, j) for i in range(k) for j in range(k) if not symmetric or j >= i]
    n_blocks = k * k
    ii = np.zeros(n_blocks * nt, dtype=np.int64)
    jj = np.zeros(n_blocks * nt, dtype=np.int64)
    ss = np.zeros(n_blocks * nt)
    index = 0
    for i, j in pairs:
        vals = _rowdot(vecs[:, :, i], vecs[:, :, j]) / divisor
        if symmetric and j != i:
            block = slice(index, index + 2 * nt)
            ii[block][0::2], ii[block][1::2] = elems[:, i], elems[:, j]
            jj[block][0::2], jj[block][1::2] = elems[:, j], elems[:, i]
            ss[block][0::2] = ss[block][1::2] = vals
            index += 2 * nt
        else:
            ii[index:index + nt] = elems[:, i]
            jj[index:index + nt] = elems[:, j]
            ss[index:index + nt] = vals
            index += nt
    return Triplets(ii, jj, ss, mesh.n_nodes, mesh.n_nodes)


def assemble_blockwise(mesh: Mesh, symmetric: bool = False) -> CscMatrix:
    return from_triplets(blockwise_triplets(mesh, symmetric))


def assemble(mesh: Mesh, strategy: str = "blockwise") -> CscMatrix:
    if strategy == "blockwise":
        return assemble_blockwise(mesh)
    if strategy == "triplet_loop":
        return assemble_triplets(mesh)
    if strategy == "dense_oracle":
        return from_dense(assemble_standard_dense(mesh))
    raise InvalidParameterError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


def barycentric_gradients(mesh: Mesh):
    """Gradients ``(NT, d, d+1)`` of the barycentric coordinates, and element measures.

    ``grad(lambda_i) = n_i / (d! |tau|)`` with ``n_i`` the scaled inward normal
    of the face opposite vertex ``i``.
    """
    if mesh.dim == 2:
        ve, area = edge_vectors_2d(mesh.nodes, mesh.elems)
        # rotating an edge traversed counter-clockwise by +90 degrees points inward
        normals = np.stack([-ve[:, 1, :], ve[:, 0, :]], axis=1)
        return normals / (2 * area)[:, None, None], area
    normals, volume = face_normals_3d(mesh.nodes, mesh.elems)
    return normals / (6 * volume)[:, None, None], volume
