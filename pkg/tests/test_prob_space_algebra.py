"""
Tests for product measures, marginals and classical separability.
"""

import inspect
import unittest

import numpy as np
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from dual_update.errors import NotSiteStructured
from dual_update.prob_space import FiniteProbSpace, RandomVariable, probability
from dual_update.prob_space_algebra import (
    conditional_probability_classical,
    is_separable,
    marginal,
    marginal_shift,
    product_space,
    total_probability_gap,
    total_variation,
)


def random_space(labels1, labels2, rng):
    w = rng.random((len(labels1), len(labels2)))
    return FiniteProbSpace.from_table(labels1, labels2, w / w.sum())


class TestProductSpace(unittest.TestCase):
    """Test product measures and marginals."""

    def setUp(self):
        """Set up test fixtures."""
        self.coin = FiniteProbSpace(["h", "t"], [0.25, 0.75])
        self.bit = FiniteProbSpace(["0", "1"], [0.5, 0.5])

    def test_product_weights(self):
        """Test P(w1, w2) = P1(w1) P2(w2)."""
        p = product_space(self.coin, self.bit)
        self.assertEqual(p.n_sites, 2)
        self.assertAlmostEqual(p[("t", "1")], 0.375)
        self.assertTrue(is_separable(p))

    def test_product_weights_always_multiply(self):
        """Test every product atom weighted by the product of its factors."""
        rng = np.random.default_rng(3)
        w1, w2 = rng.random(3), rng.random(4)
        s1 = FiniteProbSpace(["a", "b", "c"], w1 / w1.sum())
        s2 = FiniteProbSpace(["0", "1", "2", "3"], w2 / w2.sum())
        p = product_space(s1, s2)
        assert_allclose(p.weights, np.outer(s1.weights, s2.weights).ravel(), atol=1e-15)
        self.assertNotIn("combine", inspect.signature(product_space).parameters)

    def test_product_of_three(self):
        """Test that site-structured factors contribute all their sites."""
        p = product_space(product_space(self.coin, self.bit), self.bit)
        self.assertEqual(p.n_sites, 3)
        self.assertEqual(marginal(p, 0), self.coin)

    def test_marginals_recover_factors(self):
        """Test marginal of a product space."""
        p = product_space(self.coin, self.bit)
        self.assertEqual(marginal(p, 0), self.coin)
        self.assertEqual(marginal(p, 1), self.bit)

    def test_marginal_errors(self):
        """Test unstructured spaces and bad site indices."""
        with self.assertRaises(NotSiteStructured):
            marginal(self.coin, 0)
        with self.assertRaises(IndexError):
            marginal(product_space(self.coin, self.bit), 2)

    def test_correlated_space_is_entangled(self):
        """Test that perfectly correlated coordinates are not separable."""
        space = FiniteProbSpace.from_table(["0", "1"], ["0", "1"], [[0.5, 0.0], [0.0, 0.5]])
        self.assertFalse(is_separable(space))
        with self.assertRaises(NotSiteStructured):
            is_separable(self.coin)


class TestClassicalConditionals(unittest.TestCase):
    """Test conditional probabilities between site variables."""

    def setUp(self):
        """Set up test fixtures."""
        self.a = RandomVariable.site_variable(0, label="A")
        self.b = RandomVariable.site_variable(1, label="B")
        self.correlated = FiniteProbSpace.from_table(["0", "1"], ["0", "1"], [[0.0, 0.5], [0.5, 0.0]])

    def test_correlated_conditionals(self):
        """Test that conditioning on A fixes B."""
        p = conditional_probability_classical(self.correlated, (self.a, 0.0), (self.b, 1.0))
        self.assertAlmostEqual(p, 1.0)
        self.assertAlmostEqual(marginal_shift(self.correlated, self.a, 0.0), 0.5)

    def test_total_variation(self):
        """Test the distance between measures on different atom sets."""
        p = FiniteProbSpace(["x", "y"], [0.5, 0.5])
        q = FiniteProbSpace(["y", "z"], [0.5, 0.5])
        self.assertAlmostEqual(total_variation(p, q), 0.5)
        self.assertEqual(total_variation(p, p), 0.0)

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=100, deadline=None)
    def test_separable_conditionals_equal_marginals(self, seed):
        """Property: on product measures conditioning never changes the other site."""
        rng = np.random.default_rng(seed)
        w1, w2 = rng.random(3) + 0.1, rng.random(2) + 0.1
        space = product_space(FiniteProbSpace(["0", "1", "2"], w1 / w1.sum()),
                              FiniteProbSpace(["0", "1"], w2 / w2.sum()))
        self.assertTrue(is_separable(space))
        for x in (0.0, 1.0, 2.0):
            self.assertLessEqual(marginal_shift(space, self.a, x), 1e-10)
            for y in (0.0, 1.0):
                assert_allclose(conditional_probability_classical(space, (self.a, x), (self.b, y)),
                                probability(space, self.b, y), atol=1e-10)

    @given(st.integers(min_value=0, max_value=2**32 - 1))
    @settings(max_examples=200, deadline=None)
    def test_total_probability(self, seed):
        """Property: sum_x P(A=x) P(B=y|A=x) = P(B=y)."""
        rng = np.random.default_rng(seed)
        space = random_space(["0", "1", "2"], ["0", "1", "2", "3"], rng)
        self.assertLessEqual(total_probability_gap(space, self.a, self.b), 1e-10)


if __name__ == "__main__":
    unittest.main()
