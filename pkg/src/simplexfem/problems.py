"""Manufactured-solution presets on the unit square / unit cube.

Each preset bundles a smooth exact solution ``u``, its gradient, the source
``f = -Laplace(u)`` and a default boundary layout.  Neumann data is always
``grad(u) . n`` with ``n`` the outward normal of the unit box face the point
lies on, so every boundary layout stays consistent with ``u``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParameterError
from .mesh import DIRICHLET, GEOMETRY_ATOL, NEUMANN, Mesh, set_boundary_flags
from .system import PoissonProblem

BOUNDARY_LAYOUTS = ("dirichlet", "mixed", "pure-neumann")


def unit_box_normal(points, atol: float = GEOMETRY_ATOL) -> np.ndarray:
    """Outward unit normal of the unit box face containing each point."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    normal = np.zeros_like(points)
    normal[np.abs(points) < atol] = -1.0
    normal[np.abs(points - 1.0) < atol] = 1.0
    return normal


@dataclass(frozen=True)
class Preset:
    name: str
    dim: int
    exact: Callable[[np.ndarray], np.ndarray]
    grad: Callable[[np.ndarray], np.ndarray]
    f: Callable[[np.ndarray], np.ndarray]
    bc: str = "dirichlet"
    shape: str = "unit_square"

    def g_N(self, points):
        return np.einsum("ij,ij->i", self.grad(points), unit_box_normal(points))

    def problem(self, bc: str | None = None) -> PoissonProblem:
        bc = bc or self.bc
        return PoissonProblem(f=self.f, g_D=self.exact, g_N=self.g_N,
                              pure_neumann=bc == "pure-neumann")

    def residual(self, points, step: float = 1e-5) -> np.ndarray:
        """``-Laplace(u) - f`` by central second differences."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        lap = np.zeros(points.shape[0])
        u0 = self.exact(points)
        for k in range(self.dim):
            e = np.zeros(self.dim)
            e[k] = step
            lap += (self.exact(points + e) - 2 * u0 + self.exact(points - e)) / step**2
        return -lap - self.f(points)


def _sin_product(dim):
    def exact(p):
        return np.prod(np.sin(np.pi * p[:, :dim]), axis=1)

    def grad(p):
        s, c = np.sin(np.pi * p), np.cos(np.pi * p)
        g = np.empty_like(p)
        for k in range(dim):
            g[:, k] = np.pi * c[:, k] * np.prod(np.delete(s, k, axis=1), axis=1)
        return g

    def f(p):
        return dim * np.pi**2 * exact(p)

    return exact, grad, f


def _cos_product(dim):
    def exact(p):
        return np.prod(np.cos(np.pi * p[:, :dim]), axis=1)

    def grad(p):
        s, c = np.sin(np.pi * p), np.cos(np.pi * p)
        g = np.empty_like(p)
        for k in range(dim):
            g[:, k] = -np.pi * s[:, k] * np.prod(np.delete(c, k, axis=1), axis=1)
        return g

    def f(p):
        return dim * np.pi**2 * exact(p)

    return exact, grad, f


def _linear(dim):
    return (
        lambda p: np.sum(p[:, :dim], axis=1),
        lambda p: np.ones_like(p),
        lambda p: np.zeros(p.shape[0]),
    )


def _zero(dim):
    return (
        lambda p: np.zeros(p.shape[0]),
        lambda p: np.zeros_like(p),
        lambda p: np.zeros(p.shape[0]),
    )


def get_preset(name: str, dim: int = 2) -> Preset:
    """Look up a preset; ``sinsinsin`` is the 3-D alias of ``sinsin``."""
    if name == "sinsinsin":
        name, dim = "sinsin", 3
    shape = "unit_square" if dim == 2 else "unit_cube"
    if dim not in (2, 3):
        raise InvalidParameterError(f"presets exist for dim 2 and 3, not {dim}")
    if name == "sinsin":
        return Preset("sinsin", dim, *_sin_product(dim), bc="dirichlet", shape=shape)
    if name == "mixed":
        return Preset("mixed", dim, *_sin_product(dim), bc="mixed", shape=shape)
    if name == "neumann-pure":
        return Preset("neumann-pure", dim, *_cos_product(dim), bc="pure-neumann", shape=shape)
    if name == "linear":
        return Preset("linear", dim, *_linear(dim), bc="dirichlet", shape=shape)
    if name == "zero":
        return Preset("zero", dim, *_zero(dim), bc="dirichlet", shape=shape)
    raise InvalidParameterError(
        f"unknown preset {name!r}; expected sinsin, sinsinsin, mixed, neumann-pure, linear, zero"
    )


PRESET_NAMES = ("sinsin", "sinsinsin", "mixed", "neumann-pure", "linear", "zero")


def apply_layout(mesh: Mesh, bc: str) -> Mesh:
    """Re-flag the exterior faces of ``mesh``.

    ``mixed`` makes the faces on ``y = 0`` Neumann and every other exterior
    face Dirichlet.
    """
    if bc == "dirichlet":
        return set_boundary_flags(mesh, lambda c: DIRICHLET)
    if bc == "pure-neumann":
        return set_boundary_flags(mesh, lambda c: NEUMANN)
    if bc == "mixed":
        return set_boundary_flags(
            mesh, lambda c: np.where(np.abs(c[:, 1]) < GEOMETRY_ATOL, NEUMANN, DIRICHLET)
        )
    raise InvalidParameterError(f"unknown boundary layout {bc!r}; expected {BOUNDARY_LAYOUTS}")
