"""Simplicial meshes in 2-D and 3-D with per-face boundary flags.

A mesh is the triple ``(nodes, elems, bd_flags)``:

* ``nodes``    -- ``(N, d)`` float coordinates,
* ``elems``    -- ``(NT, d+1)`` zero-based vertex indices, positively oriented,
* ``bd_flags`` -- ``(NT, d+1)`` int8 flags; entry ``(t, i)`` describes the face
  of element ``t`` opposite its local vertex ``i`` (0 interior, 1 Dirichlet,
  2 Neumann, 3 Robin).

Indices are zero-based in memory.  The text format read and written here is
one-based so files line up with the usual MATLAB-style listings.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import (
    DegenerateElementError,
    IndexOutOfRangeError,
    InvalidFlagValueError,
    InvalidParameterError,
    MeshIOError,
    NonPositiveVolumeError,
    ParseError,
    ShapeMismatchError,
)

INTERIOR, DIRICHLET, NEUMANN, ROBIN = 0, 1, 2, 3
FLAG_VALUES = (INTERIOR, DIRICHLET, NEUMANN, ROBIN)

# |measure| < DEGENERATE_RTOL * (longest edge)**d marks a degenerate simplex.
DEGENERATE_RTOL = 1e-14
# Absolute tolerance for geometric predicates on (binary-fraction) coordinates.
GEOMETRY_ATOL = 1e-10

# Local vertices of the face opposite local vertex i.  The 3-D orderings give
# inward normals for positively oriented tetrahedra via cross(v12, v13).
LOCAL_FACES = {
    2: np.array([[1, 2], [2, 0], [0, 1]]),
    3: np.array([[1, 3, 2], [0, 2, 3], [0, 3, 1], [0, 1, 2]]),
}


@dataclass(frozen=True, eq=False)
class Mesh:
    dim: int
    nodes: np.ndarray
    elems: np.ndarray
    bd_flags: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elems(self) -> int:
        return self.elems.shape[0]

    def measures(self) -> np.ndarray:
        """Signed measure of every element."""
        return signed_measures(self.nodes, self.elems)

    def __eq__(self, other):
        if not isinstance(other, Mesh):
            return NotImplemented
        return (
            self.dim == other.dim
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.elems, other.elems)
            and np.array_equal(self.bd_flags, other.bd_flags)
        )

    def __repr__(self):
        return f"Mesh(dim={self.dim}, N={self.n_nodes}, NT={self.n_elems})"


@dataclass(frozen=True)
class FaceList:
    """Boundary faces with the element and local face they came from."""

    faces: np.ndarray
    parent_elem: np.ndarray
    local_face: np.ndarray

    def __len__(self):
        return self.faces.shape[0]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


def signed_measures(nodes: np.ndarray, elems: np.ndarray) -> np.ndarray:
    """Signed area (2-D) or signed volume (3-D) of each element, vectorized."""
    nodes = np.asarray(nodes, dtype=float)
    elems = np.asarray(elems)
    d = nodes.shape[1]
    if d == 2:
        ve3 = nodes[elems[:, 1]] - nodes[elems[:, 0]]
        ve2 = nodes[elems[:, 0]] - nodes[elems[:, 2]]
        return 0.5 * (-ve3[:, 0] * ve2[:, 1] + ve3[:, 1] * ve2[:, 0])
    v12 = nodes[elems[:, 1]] - nodes[elems[:, 0]]
    v13 = nodes[elems[:, 2]] - nodes[elems[:, 0]]
    v14 = nodes[elems[:, 3]] - nodes[elems[:, 0]]
    return np.einsum("ij,ij->i", np.cross(v12, v13), v14) / 6.0


def _longest_edges(nodes: np.ndarray, elems: np.ndarray) -> np.ndarray:
    k = elems.shape[1]
    longest = np.zeros(elems.shape[0])
    for a in range(k):
        for b in range(a + 1, k):
            e = nodes[elems[:, b]] - nodes[elems[:, a]]
            longest = np.maximum(longest, np.sqrt(np.einsum("ij,ij->i", e, e)))
    return longest


def degenerate_mask(nodes: np.ndarray, elems: np.ndarray, measures=None) -> np.ndarray:
    nodes = np.asarray(nodes, dtype=float)
    if measures is None:
        measures = signed_measures(nodes, elems)
    d = nodes.shape[1]
    return np.abs(measures) < DEGENERATE_RTOL * _longest_edges(nodes, elems) ** d


def _check_arrays(nodes, elems, bd_flags):
    nodes = np.asarray(nodes, dtype=float)
    if nodes.ndim != 2 or nodes.shape[1] not in (2, 3):
        raise ShapeMismatchError(f"nodes must be N x 2 or N x 3, got shape {nodes.shape}")
    d = nodes.shape[1]
    elems = np.asarray(elems)
    if elems.size == 0:
        elems = elems.reshape(0, d + 1)
    if elems.ndim != 2 or elems.shape[1] != d + 1:
        raise ShapeMismatchError(
            f"elems must be NT x {d + 1} for {d}-D nodes, got shape {elems.shape}"
        )
    if elems.size and not np.issubdtype(elems.dtype, np.integer):
        if not np.all(np.equal(np.mod(elems, 1), 0)):
            raise ShapeMismatchError("elems must contain integer indices")
    elems = elems.astype(np.int64)
    n = nodes.shape[0]
    if elems.size and (elems.min() < 0 or elems.max() >= n):
        bad = int(np.argmax((elems < 0).any(axis=1) | (elems >= n).any(axis=1)))
        raise IndexOutOfRangeError(
            f"element {bad} references a vertex outside [0, {n}): {elems[bad].tolist()}"
        )
    if bd_flags is None:
        bd_flags = np.zeros(elems.shape, dtype=np.int8)
    else:
        bd_flags = np.asarray(bd_flags)
        if bd_flags.size == 0:
            bd_flags = bd_flags.reshape(elems.shape)
        if bd_flags.shape != elems.shape:
            raise ShapeMismatchError(
                f"bd_flags shape {bd_flags.shape} differs from elems shape {elems.shape}"
            )
        if not np.isin(bd_flags, FLAG_VALUES).all():
            bad = np.setdiff1d(np.unique(bd_flags), FLAG_VALUES)
            raise InvalidFlagValueError(f"flag values must be in {{0,1,2,3}}, got {bad.tolist()}")
        bd_flags = bd_flags.astype(np.int8)
    return nodes, elems, bd_flags


def new_mesh(nodes, elems, bd_flags=None) -> Mesh:
    """Validate raw arrays and build an immutable :class:`Mesh`.

    Every element must be positively oriented (counter-clockwise in 2-D,
    right-handed in 3-D).  Missing ``bd_flags`` default to all zeros.
    """
    nodes, elems, bd_flags = _check_arrays(nodes, elems, bd_flags)
    m = signed_measures(nodes, elems)
    nonpos = np.flatnonzero(m <= 0)
    if nonpos.size:
        t = int(nonpos[0])
        raise NonPositiveVolumeError(t, float(m[t]))
    degenerate = np.flatnonzero(degenerate_mask(nodes, elems, m))
    if degenerate.size:
        raise DegenerateElementError(f"element {int(degenerate[0])} is degenerate")
    return Mesh(nodes.shape[1], _frozen(nodes), _frozen(elems), _frozen(bd_flags))


def signed_measure(mesh: Mesh, t: int) -> float:
    if not 0 <= t < mesh.n_elems:
        raise IndexOutOfRangeError(f"element index {t} outside [0, {mesh.n_elems})")
    return float(signed_measures(mesh.nodes, mesh.elems[t : t + 1])[0])


def fix_orientation(nodes, elems, bd_flags=None) -> Mesh:
    """Swap the last two vertices (and their flags) of negatively oriented elements."""
    nodes, elems, bd_flags = _check_arrays(nodes, elems, bd_flags)
    m = signed_measures(nodes, elems)
    degenerate = np.flatnonzero(degenerate_mask(nodes, elems, m))
    if degenerate.size:
        t = int(degenerate[0])
        raise DegenerateElementError(f"element {t} is degenerate (measure {m[t]:.3g})")
    neg = m < 0
    if neg.any():
        elems = elems.copy()
        bd_flags = bd_flags.copy()
        elems[neg, -2:] = elems[neg, -2:][:, ::-1]
        bd_flags[neg, -2:] = bd_flags[neg, -2:][:, ::-1]
    return new_mesh(nodes, elems, bd_flags)


def all_faces(mesh: Mesh) -> np.ndarray:
    """Every element face, face-major: all local-face-0 rows, then local-face-1, ..."""
    return np.concatenate([mesh.elems[:, f] for f in LOCAL_FACES[mesh.dim]])


def boundary_faces(mesh: Mesh, flag_value: int) -> FaceList:
    if flag_value not in (DIRICHLET, NEUMANN, ROBIN):
        raise InvalidParameterError(f"flag_value must be 1, 2 or 3, got {flag_value}")
    nt, k = mesh.elems.shape
    mask = mesh.bd_flags.T.ravel() == flag_value
    return FaceList(
        faces=all_faces(mesh)[mask],
        parent_elem=np.tile(np.arange(nt), k)[mask],
        local_face=np.repeat(np.arange(k), nt)[mask],
    )


def exterior_face_mask(mesh: Mesh) -> np.ndarray:
    """Boolean ``(NT, d+1)`` mask of faces that belong to exactly one element."""
    faces = np.sort(all_faces(mesh), axis=1)
    _, inverse, counts = np.unique(faces, axis=0, return_inverse=True, return_counts=True)
    once = counts[inverse.ravel()] == 1
    return once.reshape(mesh.dim + 1, mesh.n_elems).T


def face_centroids(mesh: Mesh) -> np.ndarray:
    """Centroids of all faces, shaped ``(NT, d+1, d)``."""
    cents = [mesh.nodes[mesh.elems[:, f]].mean(axis=1) for f in LOCAL_FACES[mesh.dim]]
    return np.stack(cents, axis=1)


def set_boundary_flags(mesh: Mesh, classifier: Callable[[np.ndarray], object]) -> Mesh:
    """Flag exterior faces by ``classifier(centroids)``; interior faces get 0.

    ``classifier`` receives an ``(M, d)`` array of face centroids and returns
    either ``M`` flag values or a single value applied to all of them.
    """
    mask = exterior_face_mask(mesh)
    centroids = face_centroids(mesh)[mask]
    values = np.broadcast_to(np.asarray(classifier(centroids)), (centroids.shape[0],))
    if not np.isin(values, FLAG_VALUES).all():
        bad = np.setdiff1d(np.unique(values), FLAG_VALUES)
        raise InvalidFlagValueError(f"classifier returned invalid flags {bad.tolist()}")
    flags = np.zeros(mesh.elems.shape, dtype=np.int8)
    flags[mask] = values
    return Mesh(mesh.dim, mesh.nodes, mesh.elems, _frozen(flags))


def on_plane(axis: int, value: float, atol: float = GEOMETRY_ATOL):
    """Predicate ``points[:, axis] == value`` up to ``atol``, for classifiers."""

    def predicate(points):
        return np.abs(np.asarray(points)[:, axis] - value) < atol

    return predicate


# --------------------------------------------------------------------------
# generators


def _grid_triangles(n_cells_x, n_cells_y, keep_cell=None):
    """Triangles of a structured grid, each cell split along its SW-NE diagonal."""
    i, j = np.meshgrid(np.arange(n_cells_x), np.arange(n_cells_y), indexing="xy")
    i, j = i.ravel(), j.ravel()
    if keep_cell is not None:
        keep = keep_cell(i, j)
        i, j = i[keep], j[keep]
    stride = n_cells_x + 1
    p00 = i + j * stride
    p10 = p00 + 1
    p01 = p00 + stride
    p11 = p01 + 1
    lower = np.column_stack([p00, p10, p11])
    upper = np.column_stack([p00, p11, p01])
    return np.vstack([lower, upper])


def _compact(nodes, elems):
    used = np.unique(elems)
    relabel = np.full(nodes.shape[0], -1, dtype=np.int64)
    relabel[used] = np.arange(used.size)
    return nodes[used], relabel[elems]


def _flag_exterior(mesh: Mesh, value: int) -> Mesh:
    if value == INTERIOR:
        return mesh
    return set_boundary_flags(mesh, lambda c: value)


def generate(shape: str, n: int, boundary: int = DIRICHLET) -> Mesh:
    """Structured meshes of the unit square, unit cube or the L-shaped domain.

    ``n`` is the number of subdivisions per unit length.  Every exterior face
    is flagged ``boundary`` (pass 0 for an unflagged mesh).
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidParameterError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    if boundary not in FLAG_VALUES:
        raise InvalidFlagValueError(f"boundary flag must be in 0..3, got {boundary}")
    h = 1.0 / n
    if shape == "unit_square":
        x, y = np.meshgrid(np.arange(n + 1) * h, np.arange(n + 1) * h, indexing="xy")
        nodes = np.column_stack([x.ravel(), y.ravel()])
        elems = _grid_triangles(n, n)
    elif shape == "lshape":
        # (-1,1)^2 minus [0,1]x[-1,0]; cells whose SW corner lies in that quadrant go.
        m = 2 * n
        coords = np.arange(m + 1) * h - 1.0
        x, y = np.meshgrid(coords, coords, indexing="xy")
        nodes = np.column_stack([x.ravel(), y.ravel()])
        elems = _grid_triangles(m, m, keep_cell=lambda i, j: ~((i >= n) & (j < n)))
        nodes, elems = _compact(nodes, elems)
    elif shape == "unit_cube":
        nodes, elems = _kuhn_cube(n)
    else:
        raise InvalidParameterError(
            f"unknown shape {shape!r}; expected unit_square, unit_cube or lshape"
        )
    return _flag_exterior(new_mesh(nodes, elems), boundary)


def _kuhn_cube(n):
    h = 1.0 / n
    s = n + 1
    x, y, z = np.meshgrid(*(np.arange(s) * h,) * 3, indexing="ij")
    # node (i, j, k) -> i + j*s + k*s^2
    nodes = np.column_stack([x.transpose(2, 1, 0).ravel(),
                             y.transpose(2, 1, 0).ravel(),
                             z.transpose(2, 1, 0).ravel()])
    i, j, k = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    base = (i + j * s + k * s * s).ravel()
    offsets = np.array([1, s, s * s])
    tets = []
    for perm in permutations(range(3)):
        # walk from the cell's origin corner to the opposite corner one axis at a time
        v0 = base
        v1 = v0 + offsets[perm[0]]
        v2 = v1 + offsets[perm[1]]
        v3 = v2 + offsets[perm[2]]
        tets.append(np.column_stack([v0, v1, v2, v3]))
    elems = np.vstack(tets)
    neg = signed_measures(nodes, elems) < 0
    elems[neg, -2:] = elems[neg, -2:][:, ::-1]
    return nodes, elems


# --------------------------------------------------------------------------
# text format


def write_mesh(mesh: Mesh, path) -> None:
    """Write ``dim N NT``, nodes, one-based elems and flags, full precision."""
    lines = [f"{mesh.dim} {mesh.n_nodes} {mesh.n_elems}"]
    lines += [" ".join(f"{v:.17g}" for v in row) for row in mesh.nodes]
    lines += [" ".join(str(v + 1) for v in row) for row in mesh.elems.tolist()]
    lines += [" ".join(str(v) for v in row) for row in mesh.bd_flags.tolist()]
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise MeshIOError(f"cannot write mesh to {path}: {exc}") from exc


def _content_lines(text):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield lineno, body.split()


def _parse_row(tokens, lineno, width, kind, path):
    if len(tokens) != width:
        raise ParseError(f"expected {width} values, found {len(tokens)}", lineno, path)
    try:
        if kind is int:
            return [int(t) for t in tokens]
        return [float(t) for t in tokens]
    except ValueError:
        raise ParseError(f"cannot parse {' '.join(tokens)!r}", lineno, path) from None


def read_mesh(path) -> Mesh:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise MeshIOError(f"cannot read mesh from {path}: {exc}") from exc
    rows = list(_content_lines(text))
    if not rows:
        raise ParseError("empty mesh file", None, path)
    lineno, header = rows[0]
    dim, n, nt = _parse_row(header, lineno, 3, int, path)
    if dim not in (2, 3) or n < 0 or nt < 0:
        raise ParseError(f"bad header 'dim N NT' = {dim} {n} {nt}", lineno, path)
    body = rows[1:]
    if len(body) not in (n + nt, n + 2 * nt):
        raise ParseError(
            f"expected {n + nt} or {n + 2 * nt} data lines after the header, "
            f"found {len(body)}",
            body[-1][0] if body else lineno,
            path,
        )
    nodes = [_parse_row(tok, ln, dim, float, path) for ln, tok in body[:n]]
    elems = []
    for ln, tok in body[n : n + nt]:
        row = _parse_row(tok, ln, dim + 1, int, path)
        if min(row) < 1 or max(row) > n:
            raise ParseError(f"vertex index outside 1..{n}: {row}", ln, path)
        elems.append([v - 1 for v in row])
    flags = None
    if len(body) == n + 2 * nt:
        flags = []
        for ln, tok in body[n + nt :]:
            row = _parse_row(tok, ln, dim + 1, int, path)
            if any(v not in FLAG_VALUES for v in row):
                raise ParseError(f"flag values must be in 0..3: {row}", ln, path)
            flags.append(row)
    return new_mesh(
        np.array(nodes, dtype=float).reshape(n, dim),
        np.array(elems, dtype=np.int64).reshape(nt, dim + 1),
        None if flags is None else np.array(flags, dtype=np.int8).reshape(nt, dim + 1),
    )


def domain_measure(mesh: Mesh) -> float:
    return float(math.fsum(mesh.measures()))
