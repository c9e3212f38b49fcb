"""
Tests for the dense linear-algebra layer.
"""

import unittest

import numpy as np
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from dual_update.errors import DimensionMismatch, DimensionTooLarge, NotHermitian, UnknownOutcome
from dual_update.hilbert import (
    apply_local,
    check_dimension,
    commutator,
    is_hermitian,
    is_projector,
    lift_to_site,
    nearest_index,
    partial_trace,
    random_density,
    random_hermitian,
    random_unitary,
    spectral_decompose,
    tensor_product,
    trace_distance,
)
from dual_update.tolerances import MAX_COMPOSITE_DIM, MAX_SITE_DIM, Tolerances


class TestSpectralDecomposition(unittest.TestCase):
    """Test eigenvalue/projector pairs."""

    def test_diagonal_with_degeneracy(self):
        """Test that repeated eigenvalues share one projector."""
        sd = spectral_decompose(np.diag([2.0, 1.0, 1.0]))
        self.assertEqual(sd.eigenvalues, [1.0, 2.0])
        self.assertEqual(sd.ranks, [2, 1])
        assert_allclose(sd.projectors[0], np.diag([0, 1, 1]), atol=1e-12)
        self.assertFalse(sd.is_nondegenerate())

    def test_pauli_x(self):
        """Test the spectrum of X."""
        sd = spectral_decompose([[0, 1], [1, 0]])
        assert_allclose(sd.eigenvalues, [-1.0, 1.0], atol=1e-12)
        assert_allclose(sd.projector_for(1.0), 0.5 * np.ones((2, 2)), atol=1e-12)
        self.assertEqual(sd.check(np.array([[0, 1], [1, 0]])), [])

    def test_identity_is_one_cluster(self):
        """Test that the identity has a single eigenspace."""
        sd = spectral_decompose(np.eye(3))
        self.assertEqual(len(sd), 1)
        self.assertEqual(sd.ranks, [3])

    def test_near_degenerate_eigenvalues_merge(self):
        """Test clustering of eigenvalues closer than the cluster tolerance."""
        sd = spectral_decompose(np.diag([1.0, 1.0 + 1e-12, 3.0]))
        self.assertEqual(len(sd), 2)
        self.assertAlmostEqual(sd.eigenvalues[0], 1.0 + 0.5e-12, places=14)

    def test_custom_cluster_tolerance(self):
        """Test that a wider cluster tolerance merges more eigenvalues."""
        sd = spectral_decompose(np.diag([1.0, 1.001]), Tolerances(CLUSTER_REL_TOL=1e-2))
        self.assertEqual(len(sd), 1)

    def test_not_hermitian(self):
        """Test that non-Hermitian input is rejected."""
        with self.assertRaises(NotHermitian):
            spectral_decompose([[0, 1], [0, 0]])

    def test_not_square(self):
        """Test that rectangular input is rejected."""
        with self.assertRaises(DimensionMismatch):
            spectral_decompose(np.zeros((2, 3)))

    def test_dimension_cap(self):
        """Test the composite and site dimension caps."""
        with self.assertRaises(DimensionTooLarge):
            check_dimension(MAX_COMPOSITE_DIM + 1)
        with self.assertRaises(DimensionTooLarge):
            check_dimension(MAX_SITE_DIM + 1, site=True)

    def test_unknown_outcome(self):
        """Test lookup of an eigenvalue that is not there."""
        sd = spectral_decompose(np.diag([0.0, 1.0]))
        with self.assertRaises(UnknownOutcome):
            sd.projector_for(0.5)

    def test_functional_calculus(self):
        """Test f(A) = sum f(x) E(x)."""
        sd = spectral_decompose(np.diag([1.0, 4.0]))
        assert_allclose(sd.apply(np.sqrt), np.diag([1.0, 2.0]), atol=1e-12)

    @given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=1, max_value=6))
    @settings(max_examples=50, deadline=None)
    def test_random_hermitian_invariants(self, seed, dim):
        """Property: projectors are idempotent, orthogonal, complete and reconstruct A."""
        rng = np.random.default_rng(seed)
        m = random_hermitian(dim, rng)
        sd = spectral_decompose(m)
        self.assertEqual(sd.check(m), [])
        self.assertEqual(sum(sd.ranks), dim)


class TestTensorOperations(unittest.TestCase):
    """Test Kronecker products, lifting and partial traces."""

    def test_tensor_product_vector_layout(self):
        """Test (a⊗b)[i*dim_b + k] = a[i] b[k]."""
        v = tensor_product([1, 2], [3, 4, 5])
        assert_allclose(v, [3, 4, 5, 6, 8, 10])

    def test_tensor_product_rejects_mixed(self):
        """Test that vectors and matrices cannot be mixed."""
        with self.assertRaises(DimensionMismatch):
            tensor_product([1, 0], np.eye(2))

    def test_lift_to_site(self):
        """Test I⊗op and op⊗I placement."""
        z = np.diag([1.0, -1.0])
        assert_allclose(lift_to_site(z, (2, 3), 0), np.kron(z, np.eye(3)))
        with self.assertRaises(DimensionMismatch):
            lift_to_site(z, (3, 2), 0)

    def test_apply_local_matches_lift(self):
        """Test that the in-place site application equals the lifted matrix."""
        rng = np.random.default_rng(3)
        dims = (2, 3, 2)
        op = random_hermitian(3, rng)
        v = rng.normal(size=12) + 1j * rng.normal(size=12)
        assert_allclose(apply_local(v, op, dims, 1), lift_to_site(op, dims, 1) @ v, atol=1e-12)
        rho = random_density(12, rng)
        lifted = lift_to_site(op, dims, 1)
        assert_allclose(apply_local(rho, op, dims, 1), lifted @ rho @ lifted.conj().T, atol=1e-12)

    def test_partial_trace_product(self):
        """Test that tracing a product operator recovers the factors."""
        rng = np.random.default_rng(5)
        a, b = random_density(2, rng), random_density(3, rng)
        rho = np.kron(a, b)
        assert_allclose(partial_trace(rho, (2, 3), 0), a, atol=1e-12)
        assert_allclose(partial_trace(rho, (2, 3), 1), b, atol=1e-12)

    def test_partial_trace_multi_site(self):
        """Test keeping several sites of a three-site product."""
        rng = np.random.default_rng(6)
        a, b, c = (random_density(d, rng) for d in (2, 2, 3))
        rho = np.kron(np.kron(a, b), c)
        assert_allclose(partial_trace(rho, (2, 2, 3), (0, 2)), np.kron(a, c), atol=1e-12)
        assert_allclose(partial_trace(rho, (2, 2, 3), [1]), b, atol=1e-12)

    def test_partial_trace_bad_dims(self):
        """Test rejected site dimensions and kept indices."""
        with self.assertRaises(DimensionMismatch):
            partial_trace(np.eye(4) / 4, (2, 3), 0)
        with self.assertRaises(DimensionMismatch):
            partial_trace(np.eye(4) / 4, (2, 2), 2)


class TestMatrixPredicates(unittest.TestCase):
    """Test Hermitian and projector checks."""

    def test_predicates(self):
        """Test is_hermitian, is_projector and commutator."""
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        z = np.diag([1.0, -1.0]).astype(complex)
        self.assertTrue(is_hermitian(x))
        self.assertFalse(is_projector(x))
        self.assertTrue(is_projector(np.diag([1.0, 0.0])))
        assert_allclose(commutator(x, z), [[0, -2], [2, 0]])

    def test_nearest_index(self):
        """Test outcome matching against a spectrum."""
        self.assertEqual(nearest_index([-1.0, 1.0], 1.0 + 1e-12), 1)
        with self.assertRaises(UnknownOutcome):
            nearest_index([-1.0, 1.0], 0.0)

    def test_trace_distance(self):
        """Test the trace distance of orthogonal pure states."""
        self.assertAlmostEqual(trace_distance(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), 1.0)

    def test_random_unitary(self):
        """Test U U† = I."""
        u = random_unitary(4, np.random.default_rng(1))
        assert_allclose(u @ u.conj().T, np.eye(4), atol=1e-12)


if __name__ == "__main__":
    unittest.main()
