"""
Tests for quantum states, the Born rule and the Lüders update.
"""

import unittest
from unittest import mock

import numpy as np
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from dual_update.errors import (
    DimensionMismatch,
    DimensionTooLarge,
    NotAState,
    NotPure,
    SiteMismatch,
    UnknownOutcome,
    ZeroProbabilityOutcome,
)
from dual_update.hilbert import random_density, random_hermitian
from dual_update.quantum_state import (
    Observable,
    OutcomeDistribution,
    QuantumState,
    bell_state,
    bipartite_luders_update,
    born_probability,
    clamp_probability,
    ket,
    luders_update,
    marginal_state,
    nonselective_update,
    outcome_distribution,
    product_state,
    random_pure_state,
)

Z = Observable(np.diag([0.0, 1.0]), label="Z")
X = Observable([[0, 1], [1, 0]], label="X")


class TestQuantumState(unittest.TestCase):
    """Test state construction and validation."""

    def test_pure_state(self):
        """Test a normalized vector with site structure."""
        s = QuantumState.pure([0, 1, 0, 0], (2, 2))
        self.assertTrue(s.is_pure)
        self.assertEqual(s.dim, 4)
        self.assertEqual(s.n_sites, 2)
        assert_allclose(s.density_matrix(), np.diag([0, 1, 0, 0]))

    def test_state_is_read_only(self):
        """Test that state data cannot be modified in place."""
        s = ket("0")
        with self.assertRaises(ValueError):
            s.data[0] = 0.0

    def test_unnormalized_vector(self):
        """Test that a vector of norm != 1 is rejected."""
        with self.assertRaises(NotAState):
            QuantumState.pure([1, 1])

    def test_bad_density(self):
        """Test trace, hermiticity and positivity checks."""
        with self.assertRaises(NotAState):
            QuantumState.density(np.eye(2))
        with self.assertRaises(NotAState):
            QuantumState.density([[0.5, 0.5], [0.0, 0.5]])
        with self.assertRaises(NotAState):
            QuantumState.density(np.diag([1.5, -0.5]))

    def test_site_dims_must_factor(self):
        """Test that site dimensions multiply to the total dimension."""
        with self.assertRaises(DimensionMismatch):
            QuantumState.pure([1, 0, 0, 0], (2, 3))

    def test_site_dimension_cap(self):
        """Test the per-site cap on compound states."""
        with self.assertRaises(DimensionTooLarge):
            QuantumState.pure(np.eye(65 * 2)[0], (65, 2))

    def test_unknown_kind(self):
        """Test that only pure and density kinds exist."""
        with self.assertRaises(NotAState):
            QuantumState("mixed", np.eye(2) / 2)

    def test_vector_of_density(self):
        """Test that a density state has no vector."""
        with self.assertRaises(NotPure):
            QuantumState.density(np.eye(2) / 2).vector

    def test_ket_and_product(self):
        """Test the basis-state helpers."""
        assert_allclose(ket("01").vector, [0, 1, 0, 0])
        s = product_state([1, 0], [0, 0, 1])
        self.assertEqual(s.site_dims, (2, 3))
        self.assertEqual(s.distance(ket("02", (2, 3))), 0.0)


class TestOutcomeDistribution(unittest.TestCase):
    """Test outcome distributions."""

    def test_sorted_and_lookup(self):
        """Test ordering and probability lookup."""
        d = OutcomeDistribution([(1.0, 0.25), (-1.0, 0.75)])
        self.assertEqual(d.outcomes, [-1.0, 1.0])
        self.assertEqual(d.probability(1.0), 0.25)
        self.assertEqual(len(d), 2)

    def test_clamped_probabilities_warn(self):
        """Test clamping into [0, 1] and the warning for more than rounding noise."""
        with self.assertLogs("dual_update.quantum_state", level="WARNING") as logs:
            self.assertEqual(clamp_probability(1.5, "x"), 1.0)
            self.assertEqual(clamp_probability(-0.25, "y"), 0.0)
        self.assertEqual(len(logs.output), 2)
        self.assertIn("Clamped x", logs.output[0])
        with mock.patch("dual_update.quantum_state.logger") as logger:
            self.assertEqual(clamp_probability(1.0 + 1e-15), 1.0)
            self.assertEqual(clamp_probability(-1e-15), 0.0)
            self.assertEqual(clamp_probability(0.375), 0.375)
        logger.warning.assert_not_called()

    def test_tiny_negative_entries_clamped(self):
        """Test that rounding noise below zero is clamped, not rejected."""
        d = OutcomeDistribution([(0.0, -1e-14), (1.0, 1.0)])
        self.assertEqual(d.probability(0.0), 0.0)

    def test_must_sum_to_one(self):
        """Test rejection of unnormalized distributions."""
        with self.assertRaises(NotAState):
            OutcomeDistribution([(0.0, 0.5), (1.0, 0.4)])


class TestBornAndLuders(unittest.TestCase):
    """Test the Born rule and the Lüders update."""

    def setUp(self):
        """Set up test fixtures."""
        self.bell = bell_state()

    def test_born_on_site(self):
        """Test p(Z=0) on either site of the Bell-type state."""
        self.assertAlmostEqual(born_probability(self.bell, Z, 0.0, site=0), 0.5, places=12)
        self.assertAlmostEqual(born_probability(self.bell, Z, 1.0, site=1), 0.5, places=12)

    def test_luders_on_bell_state(self):
        """Test that Z=0 on site 1 leaves |01⟩ and site 2 in |1⟩."""
        post = bipartite_luders_update(self.bell, Z, 0.0, site=0)
        self.assertLess(post.distance(ket("01")), 1e-12)
        rho2 = marginal_state(post, 1).density_matrix()
        assert_allclose(rho2, np.diag([0, 1]), atol=1e-12)

    def test_measurement_order_either_way(self):
        """Test updating site 2 first."""
        post = bipartite_luders_update(self.bell, Z, 0.0, site=1)
        self.assertLess(post.distance(ket("10")), 1e-12)

    def test_luders_idempotent(self):
        """Test that repeating an update changes nothing."""
        s = random_pure_state((3,), np.random.default_rng(2))
        a = Observable(np.diag([0.0, 0.0, 1.0]))
        once = luders_update(s, a, 0.0)
        twice = luders_update(once, a, 0.0)
        self.assertLess(once.distance(twice), 1e-12)

    def test_zero_probability(self):
        """Test conditioning on an impossible outcome."""
        with self.assertRaises(ZeroProbabilityOutcome) as cm:
            luders_update(ket("0"), Z, 1.0)
        self.assertIn("zero-probability outcome", str(cm.exception))

    def test_unknown_outcome(self):
        """Test an outcome outside the spectrum."""
        with self.assertRaises(UnknownOutcome):
            born_probability(ket("0"), Z, 0.5)

    def test_site_errors(self):
        """Test mismatched sites and dimensions."""
        with self.assertRaises(SiteMismatch):
            born_probability(self.bell, Z, 0.0, site=2)
        with self.assertRaises(SiteMismatch):
            born_probability(self.bell, Observable(np.eye(3)), 1.0, site=0)
        with self.assertRaises(DimensionMismatch):
            born_probability(self.bell, Z, 0.0)
        with self.assertRaises(SiteMismatch):
            bipartite_luders_update(ket("0"), Z, 0.0)

    def test_density_matches_pure(self):
        """Test that density operators give the same numbers as vectors."""
        rng = np.random.default_rng(11)
        s = random_pure_state((2, 3), rng)
        rho = QuantumState.density(s.density_matrix(), s.site_dims)
        a = Observable(random_hermitian(3, rng))
        for x in a.outcomes:
            self.assertAlmostEqual(born_probability(s, a, x, site=1),
                                   born_probability(rho, a, x, site=1), places=12)
            p = luders_update(s, a, x, site=1)
            q = luders_update(rho, a, x, site=1)
            self.assertLess(p.distance(q), 1e-10)

    def test_degenerate_outcome(self):
        """Test a degenerate eigenvalue keeps the component in its eigenspace."""
        s = QuantumState.pure(np.array([1, 1, 1]) / np.sqrt(3))
        a = Observable(np.diag([5.0, 5.0, 7.0]))
        self.assertAlmostEqual(born_probability(s, a, 5.0), 2 / 3, places=12)
        post = luders_update(s, a, 5.0)
        assert_allclose(np.abs(post.vector), [1 / np.sqrt(2), 1 / np.sqrt(2), 0], atol=1e-12)

    def test_outcome_distribution(self):
        """Test the full Born distribution."""
        d = outcome_distribution(ket("0"), X)
        assert_allclose(d.probabilities, [0.5, 0.5], atol=1e-12)

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_probabilities_sum_to_one(self, seed):
        """Property: Born probabilities over the spectrum sum to 1."""
        rng = np.random.default_rng(seed)
        s = QuantumState.density(random_density(4, rng), (2, 2))
        a = Observable(random_hermitian(2, rng))
        total = sum(born_probability(s, a, x, site=0) for x in a.outcomes)
        self.assertAlmostEqual(total, 1.0, places=10)


class TestMarginalsAndNonselective(unittest.TestCase):
    """Test reduced states and the non-selective update."""

    def test_bell_marginal_is_mixed(self):
        """Test that each site of the Bell-type state is maximally mixed."""
        for site in (0, 1):
            rho = marginal_state(bell_state(), site).density_matrix()
            assert_allclose(rho, np.eye(2) / 2, atol=1e-12)

    def test_marginal_bad_site(self):
        """Test an out-of-range site."""
        with self.assertRaises(SiteMismatch):
            marginal_state(bell_state(), 2)

    def test_nonselective_on_whole_space(self):
        """Test that the non-selective update removes coherences."""
        s = QuantumState.pure([1 / np.sqrt(2), 1 / np.sqrt(2)])
        rho = nonselective_update(s, Z).density_matrix()
        assert_allclose(rho, np.eye(2) / 2, atol=1e-12)

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_nonselective_keeps_other_marginal(self, seed):
        """Property: a non-selective site-1 update leaves the site-2 marginal unchanged."""
        rng = np.random.default_rng(seed)
        s = random_pure_state((2, 3), rng)
        a = Observable(random_hermitian(2, rng))
        before = marginal_state(s, 1)
        after = marginal_state(nonselective_update(s, a, site=0), 1)
        self.assertLess(before.distance(after), 1e-10)


if __name__ == "__main__":
    unittest.main()
