"""Triplet (coordinate) ingestion and compressed sparse column storage.

Only the kernels the finite element solver needs live here: construction
with duplicate summation, decomposition back to triplets, matrix-vector
products, submatrix extraction and dense accumulation.  A :class:`CscMatrix`
is immutable; there is deliberately no entry-wise update API.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    IndexOutOfRangeError,
    MeshIOError,
    ParseError,
    ShapeMismatchError,
    UnsortedIndexSetError,
)


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


def _as_index(a, name):
    a = np.asarray(a)
    if a.size == 0:
        return np.zeros(0, dtype=np.int64)
    if not np.issubdtype(a.dtype, np.integer):
        if not np.all(np.mod(a, 1) == 0):
            raise ShapeMismatchError(f"{name} must hold integer indices")
    return a.astype(np.int64).ravel()


@dataclass(frozen=True)
class Triplets:
    """Parallel ``(i, j, s)`` arrays describing an ``m x n`` matrix; duplicates allowed."""

    i: np.ndarray
    j: np.ndarray
    s: np.ndarray
    m: int
    n: int

    def __post_init__(self):
        i = _as_index(self.i, "i")
        j = _as_index(self.j, "j")
        s = np.asarray(self.s, dtype=float).ravel()
        if not (i.shape == j.shape == s.shape):
            raise ShapeMismatchError(
                f"i, j, s must have equal lengths, got {i.size}, {j.size}, {s.size}"
            )
        if self.m < 0 or self.n < 0:
            raise ShapeMismatchError(f"negative dimensions {self.m} x {self.n}")
        if i.size and (i.min() < 0 or i.max() >= self.m):
            raise IndexOutOfRangeError(f"row index outside [0, {self.m})")
        if j.size and (j.min() < 0 or j.max() >= self.n):
            raise IndexOutOfRangeError(f"column index outside [0, {self.n})")
        object.__setattr__(self, "i", _frozen(i, np.int64))
        object.__setattr__(self, "j", _frozen(j, np.int64))
        object.__setattr__(self, "s", _frozen(s, float))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "n", int(self.n))

    def __len__(self):
        return self.s.size


@dataclass(frozen=True, eq=False)
class CscMatrix:
    m: int
    n: int
    col_ptr: np.ndarray
    row_idx: np.ndarray
    values: np.ndarray

    @property
    def shape(self):
        return (self.m, self.n)

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def col_indices(self) -> np.ndarray:
        """Column index of every stored entry (the uncompressed ``j``)."""
        return np.repeat(np.arange(self.n), np.diff(self.col_ptr))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.m, self.n))
        out[self.row_idx, self.col_indices()] = self.values
        return out

    def diagonal(self) -> np.ndarray:
        d = np.zeros(min(self.m, self.n))
        on_diag = self.row_idx == self.col_indices()
        d[self.row_idx[on_diag]] = self.values[on_diag]
        return d

    def __matmul__(self, x):
        return matvec(self, x)

    def __eq__(self, other):
        if not isinstance(other, CscMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and np.array_equal(self.col_ptr, other.col_ptr)
            and np.array_equal(self.row_idx, other.row_idx)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"CscMatrix({self.m}x{self.n}, nnz={self.nnz})"


def _stable_order(keys: np.ndarray) -> np.ndarray:
    return np.argsort(keys, kind="stable")


def from_triplets(t: Triplets) -> CscMatrix:
    """Build a CSC matrix, summing repeated ``(i, j)`` pairs.

    Entries are ordered by a stable sort on rows followed by a stable sort on
    columns, so each duplicate group is summed in original input order and
    the result is deterministic.  Sums that come out exactly zero are dropped.
    """
    if len(t) == 0:
        return CscMatrix(t.m, t.n, _frozen(np.zeros(t.n + 1), np.int64),
                         _frozen([], np.int64), _frozen([], float))
    order = _stable_order(t.i)
    order = order[_stable_order(t.j[order])]
    i, j, s = t.i[order], t.j[order], t.s[order]

    starts = np.empty(i.size, dtype=bool)
    starts[0] = True
    starts[1:] = (i[1:] != i[:-1]) | (j[1:] != j[:-1])
    group = np.cumsum(starts) - 1
    # bincount adds weights sequentially, i.e. in input order within a group
    summed = np.bincount(group, weights=s)
    rows, cols = i[starts], j[starts]

    keep = summed != 0.0
    rows, cols, summed = rows[keep], cols[keep], summed[keep]
    col_ptr = np.zeros(t.n + 1, dtype=np.int64)
    np.cumsum(np.bincount(cols, minlength=t.n), out=col_ptr[1:])
    return CscMatrix(t.m, t.n, _frozen(col_ptr, np.int64),
                     _frozen(rows, np.int64), _frozen(summed, float))


def sparse(i, j, s, m, n) -> CscMatrix:
    """Shorthand for ``from_triplets(Triplets(i, j, s, m, n))``."""
    return from_triplets(Triplets(i, j, s, m, n))


def find(A: CscMatrix) -> Triplets:
    """Stored entries in column-major order, i.e. sorted by ``(j, i)``."""
    return Triplets(A.row_idx, A.col_indices(), A.values, A.m, A.n)


def from_dense(D) -> CscMatrix:
    D = np.asarray(D, dtype=float)
    jj, ii = np.nonzero(D.T)
    return from_triplets(Triplets(ii, jj, D[ii, jj], D.shape[0], D.shape[1]))


def transpose(A: CscMatrix) -> CscMatrix:
    t = find(A)
    return from_triplets(Triplets(t.j, t.i, t.s, A.n, A.m))


def matvec(A: CscMatrix, x) -> np.ndarray:
    """``A @ x``, accumulated column by column in storage order."""
    x = np.asarray(x, dtype=float)
    if x.shape != (A.n,):
        raise ShapeMismatchError(f"x has shape {x.shape}, expected ({A.n},)")
    if A.nnz == 0:
        return np.zeros(A.m)
    return np.bincount(A.row_idx, weights=A.values * x[A.col_indices()], minlength=A.m)


def _check_index_set(idx, bound, name):
    idx = _as_index(idx, name)
    if idx.size and (idx.min() < 0 or idx.max() >= bound):
        raise IndexOutOfRangeError(f"{name} contains an index outside [0, {bound})")
    if idx.size > 1 and np.any(np.diff(idx) <= 0):
        raise UnsortedIndexSetError(f"{name} must be strictly increasing")
    return idx


def submatrix(A: CscMatrix, rows, cols) -> CscMatrix:
    """``A[rows][:, cols]`` for strictly increasing index sets."""
    rows = _check_index_set(rows, A.m, "rows")
    cols = _check_index_set(cols, A.n, "cols")
    lo, hi = A.col_ptr[cols], A.col_ptr[cols + 1]
    lengths = hi - lo
    # positions of all stored entries in the selected columns, column by column
    pos = np.repeat(lo - np.cumsum(lengths) + lengths, lengths) + np.arange(lengths.sum())
    new_col = np.repeat(np.arange(cols.size), lengths)
    row_map = np.full(A.m, -1, dtype=np.int64)
    row_map[rows] = np.arange(rows.size)
    new_row = row_map[A.row_idx[pos]]
    keep = new_row >= 0
    new_row, new_col, vals = new_row[keep], new_col[keep], A.values[pos][keep]
    col_ptr = np.zeros(cols.size + 1, dtype=np.int64)
    np.cumsum(np.bincount(new_col, minlength=cols.size), out=col_ptr[1:])
    return CscMatrix(rows.size, cols.size, _frozen(col_ptr, np.int64),
                     _frozen(new_row, np.int64), _frozen(vals, float))


def accumulate(idx, vals, size) -> np.ndarray:
    """Dense ``out[k] = sum(vals[idx == k])``; the one-column ``accumarray``."""
    idx = _as_index(idx, "idx")
    vals = np.asarray(vals, dtype=float).ravel()
    if idx.shape != vals.shape:
        raise ShapeMismatchError(f"idx and vals lengths differ: {idx.size} vs {vals.size}")
    if idx.size and (idx.min() < 0 or idx.max() >= size):
        raise IndexOutOfRangeError(f"index outside [0, {size})")
    return np.bincount(idx, weights=vals, minlength=size).astype(float)


def storage_counts(A: CscMatrix) -> dict:
    """Integer+float slot counts of coordinate vs CSC storage for ``A``."""
    return {"coordinate": 3 * A.nnz, "csc": 2 * A.nnz + A.n + 1}


# --------------------------------------------------------------------------
# MatrixMarket coordinate format

MM_HEADER = "%%MatrixMarket matrix coordinate real general"


def write_matrix_market(A: CscMatrix, path, comment: str | None = None) -> None:
    t = find(A)
    lines = [MM_HEADER]
    if comment:
        lines += [f"% {c}" for c in comment.splitlines()]
    lines.append(f"{A.m} {A.n} {A.nnz}")
    lines += [f"{r + 1} {c + 1} {v:.17g}" for r, c, v in zip(t.i.tolist(), t.j.tolist(), t.s.tolist())]
    try:
        Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")
    except OSError as exc:
        raise MeshIOError(f"cannot write {path}: {exc}") from exc


def read_matrix_market(path) -> CscMatrix:
    """Read ``coordinate real`` files, ``general`` or ``symmetric``."""
    try:
        lines = Path(path).read_text(encoding="ascii").splitlines()
    except OSError as exc:
        raise MeshIOError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise ParseError("empty file", None, path)
    banner = lines[0].lower().split()
    if len(banner) != 5 or banner[0] != "%%matrixmarket" or banner[1:3] != ["matrix", "coordinate"]:
        raise ParseError(f"unsupported banner {lines[0]!r}", 1, path)
    if banner[3] not in ("real", "integer") or banner[4] not in ("general", "symmetric"):
        raise ParseError(f"unsupported field/symmetry {banner[3]}/{banner[4]}", 1, path)
    symmetric = banner[4] == "symmetric"

    body = [(k, ln.split()) for k, ln in enumerate(lines[1:], start=2)
            if ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ParseError("missing size line", None, path)
    k, size = body[0]
    try:
        m, n, nnz = (int(v) for v in size)
    except ValueError:
        raise ParseError(f"bad size line {' '.join(size)!r}", k, path) from None
    if len(body) - 1 != nnz:
        raise ParseError(f"expected {nnz} entries, found {len(body) - 1}", k, path)
    ii, jj, ss = [], [], []
    for k, tok in body[1:]:
        if len(tok) != 3:
            raise ParseError("expected 'row col value'", k, path)
        try:
            r, c, v = int(tok[0]), int(tok[1]), float(tok[2])
        except ValueError:
            raise ParseError(f"cannot parse {' '.join(tok)!r}", k, path) from None
        if not (1 <= r <= m and 1 <= c <= n):
            raise ParseError(f"index ({r}, {c}) outside {m} x {n}", k, path)
        ii.append(r - 1)
        jj.append(c - 1)
        ss.append(v)
        if symmetric and r != c:
            ii.append(c - 1)
            jj.append(r - 1)
            ss.append(v)
    return from_triplets(Triplets(ii, jj, ss, m, n))
