import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import barycentric_gradients_oracle, random_simplex
from simplexfem.assembly import (
    DENSE_LIMIT,
    STRATEGIES,
    assemble,
    assemble_blockwise,
    assemble_standard_dense,
    assemble_triplets,
    barycentric_gradients,
    blockwise_triplets,
    local_stiffness_normals,
    local_stiffness_reference,
)
from simplexfem.errors import DegenerateElementError, InvalidParameterError, TooLargeForDenseError
from simplexfem.mesh import generate, new_mesh
from simplexfem.sparse import find, transpose

TRI = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)]
TET = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
TRI_MATRIX = [[1, -0.5, -0.5], [-0.5, 0.5, 0], [-0.5, 0, 0.5]]
TET_MATRIX = [[1 / 2, -1 / 6, -1 / 6, -1 / 6], [-1 / 6, 1 / 6, 0, 0], [-1 / 6, 0, 1 / 6, 0], [-1 / 6, 0, 0, 1 / 6]]

TEST_MESHES = [("unit_square", 1), ("unit_square", 4), ("unit_square", 9),
               ("lshape", 3), ("unit_cube", 1), ("unit_cube", 3)]


def oracle_local(vertices):
    g = barycentric_gradients_oracle(vertices)
    v = np.asarray(vertices, dtype=float)
    d = v.shape[1]
    vol = abs(np.linalg.det(v[1:] - v[0])) / math.factorial(d)
    return vol * g.T @ g


def mesh_id(p):
    return f"{p[0]}-{p[1]}"


class TestLocal:
    def test_reference_triangle_vertex_order(self):
        At = local_stiffness_reference([(1, 0), (0, 1), (0, 0)]).entries
        np.testing.assert_allclose(At, [[0.5, 0, -0.5], [0, 0.5, -0.5], [-0.5, -0.5, 1.0]], atol=1e-15)

    @pytest.mark.parametrize("fn", [local_stiffness_reference, local_stiffness_normals])
    def test_unit_triangle(self, fn):
        np.testing.assert_allclose(fn(TRI).entries, TRI_MATRIX, atol=1e-15)

    @pytest.mark.parametrize("fn", [local_stiffness_reference, local_stiffness_normals])
    def test_reference_tet(self, fn):
        ls = fn(TET)
        np.testing.assert_allclose(ls.entries, TET_MATRIX, atol=1e-15)
        assert ls.measure == pytest.approx(1 / 6)

    @pytest.mark.parametrize("fn", [local_stiffness_reference, local_stiffness_normals])
    def test_degenerate(self, fn):
        with pytest.raises(DegenerateElementError):
            fn([(0, 0), (1, 1), (2, 2.0)])

    def test_bad_shape(self):
        with pytest.raises(InvalidParameterError):
            local_stiffness_reference([(0, 0), (1, 0)])

    @given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
    def test_both_match_oracle(self, seed, d):
        v = random_simplex(np.random.default_rng(seed), d)
        ref = oracle_local(v)
        scale = np.abs(ref).max()
        for fn in (local_stiffness_reference, local_stiffness_normals):
            At = fn(v).entries
            assert np.abs(At - ref).max() <= 1e-12 * scale
            assert np.abs(At.sum(axis=1)).max() <= 1e-13 * scale
            assert np.all(np.diag(At) > 0)
        np.testing.assert_array_equal(local_stiffness_reference(v).entries,
                                      local_stiffness_reference(v).entries.T)

    @given(st.integers(0, 2**32 - 1), st.sampled_from([2, 3]))
    def test_gradients_match_oracle(self, seed, d):
        v = random_simplex(np.random.default_rng(seed), d)
        m = new_mesh(v, [list(range(d + 1))])
        g, _ = barycentric_gradients(m)
        np.testing.assert_allclose(g[0], barycentric_gradients_oracle(v), rtol=1e-10, atol=1e-10)


class TestGlobal:
    def test_single_triangle_dense(self):
        m = new_mesh(TRI, [[0, 1, 2]])
        np.testing.assert_allclose(assemble_standard_dense(m), TRI_MATRIX, atol=1e-15)

    def test_square_one(self):
        A = assemble_standard_dense(generate("unit_square", 1))
        assert A.shape == (4, 4)
        np.testing.assert_array_equal(A, A.T)
        assert np.abs(A.sum(axis=1)).max() <= 1e-15
        assert assemble_triplets(generate("unit_square", 1)).nnz == 12

    def test_center_diagonal_is_four(self):
        m = generate("unit_square", 2)
        center = int(np.flatnonzero(np.all(np.isclose(m.nodes, 0.5), axis=1))[0])
        for s in STRATEGIES:
            assert assemble(m, s).to_dense()[center, center] == pytest.approx(4.0, abs=1e-14)

    def test_five_point_stencil(self):
        m = generate("unit_square", 4)
        A = assemble(m).to_dense()
        interior = np.flatnonzero(np.all((m.nodes > 1e-12) & (m.nodes < 1 - 1e-12), axis=1))
        for k in interior:
            row = A[k]
            assert row[k] == pytest.approx(4.0, abs=1e-14)
            nz = np.sort(row[np.abs(row) > 1e-14])
            np.testing.assert_allclose(nz, [-1, -1, -1, -1, 4], atol=1e-14)

    @pytest.mark.parametrize("p", TEST_MESHES, ids=mesh_id)
    def test_strategies_agree(self, p):
        m = generate(*p)
        mats = {s: assemble(m, s).to_dense() for s in STRATEGIES}
        scale = np.abs(mats["dense_oracle"]).max()
        for a in STRATEGIES:
            for b in STRATEGIES:
                assert np.abs(mats[a] - mats[b]).max() <= 1e-14 * scale

    @pytest.mark.parametrize("n", [1, 8, 16])
    def test_blockwise_bitwise_2d(self, n):
        m = generate("unit_square", n)
        assert assemble_blockwise(m) == assemble_triplets(m)

    @pytest.mark.parametrize("p", TEST_MESHES, ids=mesh_id)
    def test_blockwise_triplet_same_pattern(self, p):
        # same triplet multiset; duplicate sums may round differently
        m = generate(*p)
        A, B = assemble_blockwise(m), assemble_triplets(m)
        np.testing.assert_array_equal(A.col_ptr, B.col_ptr)
        np.testing.assert_array_equal(A.row_idx, B.row_idx)
        assert np.abs(A.values - B.values).max() <= 1e-14 * np.abs(A.values).max()

    @pytest.mark.parametrize("p", TEST_MESHES, ids=mesh_id)
    def test_symmetry_and_kernel(self, p):
        m = generate(*p)
        for s in STRATEGIES:
            A = assemble(m, s)
            D = A.to_dense()
            assert np.abs(D - D.T).max() <= 1e-15
            assert np.abs(A @ np.ones(m.n_nodes)).max() <= 1e-10 * np.abs(A.values).max()
        # triplet-built matrices are bitwise symmetric
        A = assemble_triplets(m)
        assert transpose(A) == A

    def test_symmetry_blockwise_2d_bitwise(self):
        A = assemble_blockwise(generate("lshape", 4))
        assert transpose(A) == A

    @pytest.mark.parametrize("p", [("lshape", 4), ("unit_cube", 2)], ids=mesh_id)
    def test_psd_probe(self, p, rng):
        A = assemble(generate(*p))
        for _ in range(100):
            x = rng.standard_normal(A.n)
            x /= np.linalg.norm(x)
            assert x @ (A @ x) >= -1e-12

    @pytest.mark.parametrize("shape,d", [("unit_square", 2), ("unit_cube", 3)])
    @pytest.mark.parametrize("s", [0.5, 3.0])
    def test_scaling(self, shape, d, s):
        m = generate(shape, 2)
        scaled = new_mesh(s * m.nodes, m.elems, m.bd_flags)
        A, B = assemble(m).to_dense(), assemble(scaled).to_dense()
        np.testing.assert_allclose(B, s ** (d - 2) * A, rtol=1e-12, atol=1e-12 * np.abs(A).max())

    @pytest.mark.parametrize("p", [("unit_square", 5), ("unit_cube", 2)], ids=mesh_id)
    def test_symmetric_flag(self, p):
        m = generate(*p)
        t_full, t_sym = blockwise_triplets(m), blockwise_triplets(m, symmetric=True)
        assert len(t_full) == len(t_sym)
        A, B = assemble_blockwise(m), assemble_blockwise(m, symmetric=True)
        assert np.abs(A.to_dense() - B.to_dense()).max() <= 1e-15
        assert transpose(B) == B

    def test_triplet_count(self):
        assert len(blockwise_triplets(generate("unit_square", 3))) == 9 * 18
        assert len(blockwise_triplets(generate("unit_cube", 1))) == 16 * 6

    def test_blockwise_order(self):
        m = generate("unit_square", 2)
        t = blockwise_triplets(m)
        nt = m.n_elems
        # first block is (i, j) = (0, 0) over ascending elements
        np.testing.assert_array_equal(t.i[:nt], m.elems[:, 0])
        np.testing.assert_array_equal(t.j[nt:2 * nt], m.elems[:, 1])

    def test_single_tet_blockwise(self):
        m = new_mesh(TET, [[0, 1, 2, 3]])
        np.testing.assert_allclose(assemble_blockwise(m).to_dense(),
                                   local_stiffness_normals(TET).entries, atol=1e-15)

    def test_diagonal_positive(self):
        A = assemble(generate("lshape", 3))
        assert np.all(A.diagonal() > 0)
        assert find(A).s.size == A.nnz

    def test_dense_guard(self):
        m = generate("unit_square", 45)
        assert m.n_nodes > DENSE_LIMIT
        with pytest.raises(TooLargeForDenseError):
            assemble(m, "dense_oracle")

    def test_unknown_strategy(self):
        with pytest.raises(InvalidParameterError):
            assemble(generate("unit_square", 1), "magic")
