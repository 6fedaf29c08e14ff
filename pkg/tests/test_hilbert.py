import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hilproc import LinOp, covariance_operator, operator_norm


class TestApply:
    def test_identity_returns_vector(self):
        v = np.array([1.5, -2.0, 0.25])
        assert np.array_equal(LinOp.identity(3).apply(v), v)

    def test_zero_operator(self):
        assert np.array_equal(LinOp.zero(2).apply([3.0, 4.0]), np.zeros(2))

    def test_diagonal(self):
        out = LinOp(np.diag([2.0, 3.0])).apply([1.0, 1.0])
        assert np.array_equal(out, [2.0, 3.0])

    def test_dimension_mismatch_raises(self):
        with pytest.raises(ValueError, match="dimension mismatch"):
            LinOp.identity(3).apply([1.0, 2.0])

    def test_linearity(self, gen):
        op = LinOp(gen.normal(size=(4, 4)))
        u, v = gen.normal(size=4), gen.normal(size=4)
        lhs = op.apply(2.0 * u - 3.0 * v)
        rhs = 2.0 * op.apply(u) - 3.0 * op.apply(v)
        assert np.allclose(lhs, rhs, atol=1e-12)


class TestOperatorNorm:
    def test_identity_is_one(self):
        assert LinOp.identity(5).norm == 1.0

    def test_diagonal_is_max_entry(self):
        assert operator_norm(np.diag([3.0, 1.0, 0.5])) == pytest.approx(3.0, rel=1e-10)

    def test_nilpotent_two_by_two(self):
        # Gram matrix of [[0,1],[0,0]] is diag(0,1): largest singular value 1
        assert operator_norm(np.array([[0.0, 1.0], [0.0, 0.0]])) == pytest.approx(1.0, rel=1e-12)

    def test_matches_svd_on_random_matrices(self, gen):
        for d in (3, 5, 9, 16):
            for _ in range(5):
                mat = gen.normal(size=(d, d))
                top = float(np.linalg.svd(mat, compute_uv=False)[0])
                assert operator_norm(mat) == pytest.approx(top, rel=1e-10)

    def test_zero_matrix(self):
        assert operator_norm(np.zeros((6, 6))) == 0.0

    def test_adjoint_preserves_norm(self, gen):
        op = LinOp(gen.normal(size=(5, 5)))
        assert op.adjoint().norm == pytest.approx(op.norm, rel=1e-10)

    def test_submultiplicative(self, gen):
        for _ in range(20):
            a = LinOp(gen.normal(size=(4, 4)))
            b = LinOp(gen.normal(size=(4, 4)))
            assert (a @ b).norm <= a.norm * b.norm * (1 + 1e-9)


class TestCovariance:
    def test_all_zero_samples(self):
        cov = covariance_operator(np.zeros((5, 3)))
        assert np.array_equal(cov.entries, np.zeros((3, 3)))

    def test_plus_minus_first_axis(self):
        # brute force: average of the two outer products is e1 x e1
        e1 = np.array([1.0, 0.0])
        cov = covariance_operator([e1, -e1])
        expected = (np.outer(e1, e1) + np.outer(-e1, -e1)) / 2
        assert np.array_equal(cov.entries, expected)

    def test_two_axes(self):
        samples = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
        expected = sum(np.outer(s, s) for s in samples) / 4
        assert np.allclose(covariance_operator(samples).entries, expected)
        assert np.allclose(expected, np.diag([0.5, 0.5]))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            covariance_operator(np.zeros((0, 3)))

    def test_symmetry_is_exact_and_psd(self, gen):
        samples = gen.normal(size=(200, 6)) @ gen.normal(size=(6, 6))
        cov = covariance_operator(samples)
        assert np.array_equal(cov.entries, cov.adjoint().entries)
        for _ in range(25):
            v = gen.normal(size=6)
            quad = v @ cov.entries @ v
            assert quad >= -1e-12 * float(v @ v)


finite_vec = st.lists(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), min_size=1, max_size=8
)


@given(finite_vec, finite_vec)
@settings(max_examples=60, deadline=None)
def test_triangle_inequality(u, v):
    size = min(len(u), len(v))
    a, b = np.array(u[:size]), np.array(v[:size])
    assert np.linalg.norm(a + b) <= np.linalg.norm(a) + np.linalg.norm(b) + 1e-6
