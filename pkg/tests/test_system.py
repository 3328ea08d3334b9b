import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simplexfem.assembly import assemble
from simplexfem.errors import NoDirichletBoundaryError, UnsupportedBoundaryTypeError
from simplexfem.mesh import generate, new_mesh, set_boundary_flags
from simplexfem.system import (
    apply_dirichlet,
    apply_neumann,
    assemble_load,
    average_value,
    boundary_partition,
    enforce_compatibility,
    error_norms,
    interpolate,
    zero_average_shift,
)

TRI = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]


def ones(p):
    return np.ones(len(p))


class TestLoad:
    def test_single_triangle(self):
        b = assemble_load(new_mesh(TRI, [[0, 1, 2]]), ones)
        np.testing.assert_allclose(b, [1 / 6] * 3, rtol=1e-15)

    def test_zero(self):
        assert np.all(assemble_load(generate("unit_square", 3), lambda p: np.zeros(len(p))) == 0)

    @pytest.mark.parametrize("shape,total", [("unit_square", 1.0), ("lshape", 3.0), ("unit_cube", 1.0)])
    def test_partition_of_unity(self, shape, total):
        b = assemble_load(generate(shape, 8 if shape != "unit_cube" else 3), ones)
        assert abs(b.sum() - total) <= 1e-14 * total

    @pytest.mark.parametrize("shape", ["unit_square", "unit_cube"])
    def test_quadratic_source_exact(self, shape):
        # int x^2 over the unit box is 1/3 in any dimension
        b = assemble_load(generate(shape, 4 if shape == "unit_square" else 2), lambda p: p[:, 0] ** 2)
        assert b.sum() == pytest.approx(1 / 3, rel=1e-13)

    def test_linear_source_per_node(self):
        # int x phi_i on the unit triangle: (1 + [i==x-vertex]) / 24
        b = assemble_load(new_mesh(TRI, [[0, 1, 2]]), lambda p: p[:, 0])
        np.testing.assert_allclose(b, [1 / 24, 2 / 24, 1 / 24], rtol=1e-14)

    def test_tet_linear_per_node(self):
        tet = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
        b = assemble_load(new_mesh(tet, [[0, 1, 2, 3]]), lambda p: p[:, 0])
        # int x lambda_i = |T| (1 + [i==1]) / 20
        np.testing.assert_allclose(b, np.array([1, 2, 1, 1]) / 120, rtol=1e-13)


class TestNeumann:
    def test_unit_edge(self):
        m = new_mesh(TRI, [[0, 1, 2]], [[0, 0, 2]])  # face opposite vertex 2 is (0,0)-(1,0)
        b = apply_neumann(np.zeros(3), m, ones)
        np.testing.assert_allclose(b, [0.5, 0.5, 0.0])

    def test_zero_data(self):
        m = set_boundary_flags(generate("unit_square", 3), lambda c: 2)
        b0 = np.arange(m.n_nodes, dtype=float)
        np.testing.assert_array_equal(apply_neumann(b0, m, lambda p: np.zeros(len(p))), b0)
        np.testing.assert_array_equal(apply_neumann(b0, m, None), b0)

    def test_perimeter(self):
        m = set_boundary_flags(generate("unit_square", 5), lambda c: 2)
        assert apply_neumann(np.zeros(m.n_nodes), m, ones).sum() == pytest.approx(4.0, rel=1e-14)

    def test_cube_surface(self):
        m = set_boundary_flags(generate("unit_cube", 2), lambda c: 2)
        assert apply_neumann(np.zeros(m.n_nodes), m, ones).sum() == pytest.approx(6.0, rel=1e-14)

    def test_only_neumann_faces(self):
        m = set_boundary_flags(generate("unit_square", 4), lambda c: np.where(c[:, 1] < 1e-10, 2, 1))
        b = apply_neumann(np.zeros(m.n_nodes), m, ones)
        assert b.sum() == pytest.approx(1.0)
        assert np.all(b[m.nodes[:, 1] > 0] == 0)


class TestDirichlet:
    def test_zero_data(self):
        m = generate("unit_square", 3)
        A = assemble(m)
        b = np.arange(m.n_nodes, dtype=float)
        u0, b_mod, _ = apply_dirichlet(A, b, m, lambda p: np.zeros(len(p)))
        assert np.all(u0 == 0)
        np.testing.assert_array_equal(b_mod, b)

    def test_single_triangle(self):
        m = new_mesh(TRI, [[0, 1, 2]], [[1, 1, 1]])
        u0, _, part = apply_dirichlet(assemble(m), np.zeros(3), m, lambda p: p[:, 0])
        assert u0.tolist() == [0, 1, 0]
        assert part.free_nodes.size == 0

    def test_constant_lift_in_kernel(self):
        # A 1 = 0 makes the lifted load equal A_ff 1, so u_free = 1 solves the reduced system
        m = generate("unit_square", 2)
        A = assemble(m)
        _, b_mod, part = apply_dirichlet(A, np.zeros(m.n_nodes), m, ones)
        free = part.free_nodes
        A_ff = A.to_dense()[np.ix_(free, free)]
        assert np.abs(b_mod[free] - A_ff @ np.ones(free.size)).max() <= 1e-12
        assert b_mod[free].tolist() == pytest.approx([4.0])

    def test_matrix_untouched(self):
        m = generate("unit_square", 3)
        A = assemble(m)
        before = (A.col_ptr.copy(), A.row_idx.copy(), A.values.copy())
        apply_dirichlet(A, np.ones(m.n_nodes), m, ones)
        for a, b in zip(before, (A.col_ptr, A.row_idx, A.values)):
            np.testing.assert_array_equal(a, b)

    def test_no_dirichlet(self):
        m = set_boundary_flags(generate("unit_square", 2), lambda c: 2)
        with pytest.raises(NoDirichletBoundaryError):
            apply_dirichlet(assemble(m), np.zeros(m.n_nodes), m, ones)

    def test_robin_rejected(self):
        m = set_boundary_flags(generate("unit_square", 2), lambda c: 3)
        with pytest.raises(UnsupportedBoundaryTypeError):
            boundary_partition(m)

    @pytest.mark.parametrize("shape,n", [("unit_square", 4), ("lshape", 3), ("unit_cube", 2)])
    def test_partition(self, shape, n):
        m = generate(shape, n)
        part = boundary_partition(m)
        assert np.intersect1d(part.dirichlet_nodes, part.free_nodes).size == 0
        assert part.dirichlet_nodes.size + part.free_nodes.size == m.n_nodes
        assert set(part.dirichlet_faces.faces.ravel()) <= set(part.dirichlet_nodes)


class TestCompatibility:
    def test_example(self):
        np.testing.assert_array_equal(enforce_compatibility([1, 2, 3]), [-1, 0, 1])

    def test_zero_mean_unchanged(self):
        v = np.array([0.25, -0.5, 0.25])
        assert np.abs(enforce_compatibility(v) - v).max() <= 1e-16

    @given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50))
    def test_mean_zero(self, v):
        out = enforce_compatibility(v)
        assert abs(out.mean()) <= 1e-12 * max(1.0, float(np.abs(v).max()))

    def test_compatible_data_small_correction(self):
        m = set_boundary_flags(generate("unit_square", 8), lambda c: 2)
        b = apply_neumann(assemble_load(m, lambda p: np.zeros(len(p))), m, lambda p: np.zeros(len(p)))
        assert np.abs(enforce_compatibility(b) - b).max() <= 1e-12 * max(np.linalg.norm(b), 1.0)

    def test_cos_preset_mean_is_quadrature_error(self):
        m = set_boundary_flags(generate("unit_square", 16), lambda c: 2)
        f = lambda p: 2 * np.pi**2 * np.cos(np.pi * p[:, 0]) * np.cos(np.pi * p[:, 1])  # noqa: E731
        b = assemble_load(m, f)  # g_N = 0 for this solution on the unit square
        assert abs(b.mean()) <= 1e-3
        assert abs(enforce_compatibility(b).mean()) <= 1e-16


class TestShift:
    def test_constant(self):
        m = generate("unit_square", 3)
        assert np.abs(zero_average_shift(m, np.full(m.n_nodes, 5.0))).max() <= 1e-14

    def test_x(self):
        m = generate("unit_square", 4)
        u = interpolate(m, lambda p: p[:, 0])
        assert average_value(m, u) == pytest.approx(0.5, rel=1e-14)
        np.testing.assert_allclose(zero_average_shift(m, u), u - 0.5, atol=1e-15)

    @settings(max_examples=20)
    @given(st.integers(0, 2**32 - 1), st.sampled_from(["unit_square", "lshape", "unit_cube"]))
    def test_idempotent(self, seed, shape):
        m = generate(shape, 3)
        u = np.random.default_rng(seed).standard_normal(m.n_nodes)
        once = zero_average_shift(m, u)
        assert abs(average_value(m, once)) <= 1e-13
        assert np.abs(zero_average_shift(m, once) - once).max() <= 1e-14


def sinsin(p):
    return np.sin(np.pi * p[:, 0]) * np.sin(np.pi * p[:, 1])


def sinsin_grad(p):
    return np.pi * np.column_stack([
        np.cos(np.pi * p[:, 0]) * np.sin(np.pi * p[:, 1]),
        np.sin(np.pi * p[:, 0]) * np.cos(np.pi * p[:, 1]),
    ])


class TestErrorNorms:
    @pytest.mark.parametrize("shape", ["unit_square", "unit_cube"])
    def test_linear_exact(self, shape):
        m = generate(shape, 3)
        u = lambda p: p.sum(axis=1)  # noqa: E731
        l2, h1 = error_norms(m, interpolate(m, u), u, lambda p: np.ones_like(p))
        assert l2 <= 1e-14 and h1 <= 1e-13

    def test_constant_offset(self):
        m = generate("lshape", 4)
        u_h = interpolate(m, sinsin)
        l2_0, h1_0 = error_norms(m, u_h, sinsin, sinsin_grad)
        l2, h1 = error_norms(m, u_h + 0.5, lambda p: sinsin(p) - 0.0, sinsin_grad)
        assert h1 == pytest.approx(h1_0, rel=1e-12)
        l2_c, h1_c = error_norms(m, interpolate(m, sinsin) * 0 + 0.7, lambda p: np.zeros(len(p)),
                                 lambda p: np.zeros_like(p))
        assert l2_c == pytest.approx(0.7 * math.sqrt(3.0), rel=1e-13)
        assert h1_c <= 1e-14

    def test_h1_shift_invariance_exact(self):
        m = generate("unit_square", 6)
        u_h = interpolate(m, sinsin)
        _, h1_a = error_norms(m, u_h, sinsin, sinsin_grad)
        _, h1_b = error_norms(m, u_h + 2.0, sinsin, sinsin_grad)
        assert h1_a == pytest.approx(h1_b, rel=1e-12)

    def test_interpolation_ratio(self):
        errs = []
        for n in (8, 16):
            m = generate("unit_square", n)
            errs.append(error_norms(m, interpolate(m, sinsin), sinsin, sinsin_grad)[0])
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
