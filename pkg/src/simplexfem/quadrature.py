"""Quadrature on simplices in barycentric form.

A rule is a set of barycentric points ``lambda`` (rows summing to one) and
weights summing to one; on a simplex with vertices ``x_k`` it approximates

    int_tau f  ~  |tau| * sum_q w_q f(sum_k lambda_qk x_k).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateElementError, InvalidParameterError, UnknownRuleError


@dataclass(frozen=True, eq=False)
class QuadRule:
    dim: int
    points: np.ndarray
    weights: np.ndarray
    order: int
    name: str = ""

    def __post_init__(self):
        for attr in ("points", "weights"):
            a = np.array(getattr(self, attr), dtype=float, copy=True)
            a.setflags(write=False)
            object.__setattr__(self, attr, a)

    @property
    def n_points(self) -> int:
        return self.weights.size

    def cartesian(self, vertices) -> np.ndarray:
        """Quadrature points mapped onto the simplex with the given vertices."""
        return self.points @ np.asarray(vertices, dtype=float)


def _perms(a, b, k):
    """All distinct rows with one entry ``a`` and ``k - 1`` entries ``b``."""
    return [[a if i == j else b for i in range(k)] for j in range(k)]


# order-2 four-point tetrahedron rule: a = (5 + 3 sqrt5)/20, b = (5 - sqrt5)/20
TET4_A = 0.5854101966249685
TET4_B = 0.1381966011250105

# Gauss-Legendre nodes/weights on [-1, 1], positive half, textbook values
_GAUSS = {
    1: ([0.0], [2.0]),
    2: ([0.57735026918962576], [1.0]),
    3: ([0.0, 0.77459666924148338], [0.88888888888888889, 0.55555555555555556]),
    4: ([0.33998104358485626, 0.86113631159405258],
        [0.65214515486254614, 0.34785484513745386]),
    5: ([0.0, 0.53846931010568309, 0.90617984593866399],
        [0.56888888888888889, 0.47862867049936647, 0.23692688505618909]),
}


def _build(dim: int, name: str) -> QuadRule:
    k = dim + 1
    if name == "center":
        return QuadRule(dim, [[1.0 / k] * k], [1.0], 1, name)
    if name == "vertex":
        return QuadRule(dim, np.eye(k), [1.0 / k] * k, 1, name)
    if name == "simpson" and dim == 1:
        return QuadRule(1, [[1.0, 0.0], [0.5, 0.5], [0.0, 1.0]], [1 / 6, 4 / 6, 1 / 6], 3, name)
    if name == "midpoint_edges" and dim == 2:
        return QuadRule(2, _perms(0.0, 0.5, 3), [1 / 3] * 3, 2, name)
    if name == "tet4" and dim == 3:
        return QuadRule(3, _perms(TET4_A, TET4_B, 4), [0.25] * 4, 2, name)
    raise UnknownRuleError(f"no rule named {name!r} in dimension {dim}")


RULE_NAMES = {
    1: ("center", "vertex", "simpson"),
    2: ("center", "vertex", "midpoint_edges"),
    3: ("center", "vertex", "tet4"),
}

_CACHE: dict = {}


def rule(dim: int, name: str) -> QuadRule:
    """Tabulated rule ``name`` for ``dim``-simplices.

    ``center`` and ``vertex`` (trapezoidal) exist in every dimension; the
    rest are ``simpson`` (1-D), ``midpoint_edges`` (2-D) and ``tet4`` (3-D).
    """
    key = (dim, name)
    if key not in _CACHE:
        _CACHE[key] = _build(dim, name)
    return _CACHE[key]


def gauss_legendre_1d(n: int) -> QuadRule:
    """``n``-point Gauss-Legendre rule (exact through degree ``2n - 1``)."""
    if n not in _GAUSS:
        raise UnknownRuleError(f"Gauss-Legendre rules are tabulated for n = 1..5, not {n}")
    half_x, half_w = _GAUSS[n]
    x = np.array([-v for v in reversed(half_x) if v != 0.0] + list(half_x))
    w = np.array([w for v, w in reversed(list(zip(half_x, half_w))) if v != 0.0] + list(half_w))
    # t in [-1, 1] -> barycentric (lambda_1, lambda_2) = ((1 - t)/2, (1 + t)/2)
    pts = np.column_stack([(1 - x) / 2, (1 + x) / 2])
    return QuadRule(1, pts, w / 2, 2 * n - 1, f"gauss{n}")


def small_det(B) -> float:
    """Determinant of a 1x1, 2x2 or 3x3 matrix by cofactor expansion."""
    B = np.asarray(B, dtype=float)
    if B.shape == (1, 1):
        return float(B[0, 0])
    if B.shape == (2, 2):
        return float(B[0, 0] * B[1, 1] - B[0, 1] * B[1, 0])
    if B.shape == (3, 3):
        return float(np.dot(np.cross(B[0], B[1]), B[2]))
    return float(np.linalg.det(B))


def simplex_measure(vertices) -> float:
    """Unsigned length/area/volume of the simplex spanned by ``vertices``."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    d = v.shape[0] - 1
    edges = v[1:] - v[0]
    if edges.shape[1] == d:
        return abs(small_det(edges)) / math.factorial(d)
    # embedded simplex (e.g. a triangle in 3-D): Gram determinant
    return math.sqrt(max(np.linalg.det(edges @ edges.T), 0.0)) / math.factorial(d)


def integrate(r: QuadRule, vertices, f) -> float:
    """Apply ``r`` to ``f`` on a simplex; ``f`` maps ``(n, d)`` points to ``n`` values."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[0] != r.dim + 1:
        raise InvalidParameterError(
            f"a {r.dim}-simplex needs {r.dim + 1} vertices, got {v.shape[0]}"
        )
    size = simplex_measure(v)
    scale = np.max(np.linalg.norm(v[1:] - v[0], axis=1)) if v.shape[0] > 1 else 0.0
    if size <= 1e-14 * scale ** r.dim or size == 0.0:
        raise DegenerateElementError("quadrature on a degenerate simplex")
    vals = np.asarray(f(r.cartesian(v)), dtype=float).reshape(-1)
    return float(size * np.dot(r.weights, vals))


def simpson_interval(a: float, b: float, f) -> float:
    if not a < b:
        raise InvalidParameterError(f"need a < b, got [{a}, {b}]")
    return (b - a) * (f(a) + 4 * f((a + b) / 2) + f(b)) / 6


def barycentric_monomial_integral(exponents, measure: float = 1.0) -> float:
    """Closed form of ``int_tau prod_k lambda_k**a_k`` on a ``d``-simplex."""
    d = len(exponents) - 1
    num = math.prod(math.factorial(a) for a in exponents) * math.factorial(d)
    return num / math.factorial(sum(exponents) + d) * measure


def all_rules():
    """Every tabulated rule, including the Gauss-Legendre family."""
    rules = [rule(d, name) for d, names in RULE_NAMES.items() for name in names]
    rules += [gauss_legendre_1d(n) for n in sorted(_GAUSS)]
    return rules
