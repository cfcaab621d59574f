# coding=utf-8
"""Tests of divergences, capacities and exponents."""

import math
import unittest

import numpy as np

from ..channel_core import CompoundFamily, Dmc, bsc, bsc_pair
from ..exceptions import ArgumentError, NumericError
from ..infotheory import (BlahutArimoto, CompoundCapacitySolver, as_distribution, binary_entropy, binary_kl,
                          burnashev_b, capacity, capacity_vector, channel_dispersion, chernoff_information,
                          compound_capacity_feedback, compound_capacity_nofeedback, entropy,
                          first_maximizer, information_density_moments, kl_divergence,
                          mutual_information, simplex_grid, simplex_grid_size, stacked_channel,
                          tilted_distribution)
from .utilities import BEC_03, IDENTITY


class DivergenceTest(unittest.TestCase):

    def test_self_divergence_is_zero(self):
        for p in ([0.5, 0.5], [0.1, 0.2, 0.7], [1.0, 0.0]):
            self.assertEqual(kl_divergence(p, p), 0.0)

    def test_bsc_rows(self):
        """D((0.1, 0.9) || (0.9, 0.1)) = 0.8 log2 9."""
        self.assertAlmostEqual(kl_divergence([0.1, 0.9], [0.9, 0.1]), 0.8 * math.log2(9.0), places=12)

    def test_single_term(self):
        self.assertAlmostEqual(kl_divergence([1.0, 0.0], [0.5, 0.5]), 1.0, places=15)

    def test_disjoint_support_is_infinite(self):
        self.assertEqual(kl_divergence([1.0, 0.0], [0.0, 1.0]), math.inf)

    def test_invalid_distribution(self):
        with self.assertRaises(ArgumentError):
            kl_divergence([0.5, 0.6], [0.5, 0.5])

    def test_sum_tolerance(self):
        """Distributions off by more than 1e-12 are rejected, not renormalized."""
        with self.assertRaises(ArgumentError):
            as_distribution([0.5, 0.5 + 1e-10])
        with self.assertRaises(ArgumentError):
            kl_divergence([0.3, 0.7 - 1e-10], [0.5, 0.5])
        np.testing.assert_array_equal(as_distribution([0.25, 0.75]), [0.25, 0.75])
        as_distribution([0.1] * 10)

    def test_nonnegative(self):
        rng = np.random.default_rng(4)
        for _ in range(100):
            p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
            self.assertGreaterEqual(kl_divergence(p, q), 0.0)

    def test_binary_kl_closed_forms(self):
        """Binary divergences used by the threshold rule."""
        self.assertAlmostEqual(binary_kl(0.5, 0.1), 0.5 * math.log2(25.0 / 9.0), places=12)
        self.assertAlmostEqual(binary_kl(0.3, 0.1), 0.3 * math.log2(3.0) + 0.7 * math.log2(7.0 / 9.0), places=12)
        self.assertAlmostEqual(binary_kl(0.3, 0.9), 0.3 * math.log2(1.0 / 3.0) + 0.7 * math.log2(7.0), places=12)

    def test_entropy(self):
        self.assertAlmostEqual(entropy([0.25] * 4), 2.0, places=14)
        self.assertAlmostEqual(binary_entropy(0.5), 1.0, places=14)
        self.assertEqual(binary_entropy(0.0), 0.0)


class MutualInformationTest(unittest.TestCase):

    def test_useless_channel(self):
        channel = Dmc([[0.3, 0.7], [0.3, 0.7]])
        self.assertAlmostEqual(mutual_information([0.2, 0.8], channel), 0.0, places=14)

    def test_bsc_uniform_input(self):
        self.assertAlmostEqual(mutual_information([0.5, 0.5], bsc(0.1)), 1.0 - binary_entropy(0.1), places=12)

    def test_identity(self):
        self.assertAlmostEqual(mutual_information([0.5, 0.5], Dmc(IDENTITY)), 1.0, places=14)


class CapacityTest(unittest.TestCase):

    def test_identity(self):
        value, p = capacity(Dmc(IDENTITY))
        self.assertAlmostEqual(value, 1.0, delta=1e-9)
        np.testing.assert_allclose(p, [0.5, 0.5])

    def test_bsc_closed_form(self):
        """capacity(BSC(p)) = 1 - h(p)."""
        for p in (0.05, 0.1, 0.2, 0.4):
            self.assertAlmostEqual(capacity(bsc(p))[0], 1.0 - binary_entropy(p), delta=1e-6)

    def test_bec_closed_form(self):
        self.assertAlmostEqual(capacity(Dmc(BEC_03))[0], 0.7, delta=1e-6)

    def test_asymmetric_channel(self):
        """Z channel with crossover 1/2: C = log2(5/4)."""
        z = Dmc([[1.0, 0.0], [0.5, 0.5]])
        self.assertAlmostEqual(capacity(z)[0], math.log2(1.25), delta=1e-6)

    def test_lower_bounds_increase(self):
        """Blahut-Arimoto lower bounds never decrease."""
        solver = BlahutArimoto(Dmc([[0.7, 0.2, 0.1], [0.1, 0.1, 0.8], [0.3, 0.4, 0.3]]), tol=1e-10)
        solver.solve()
        history = np.array(solver.lower_history)
        self.assertTrue(np.all(np.diff(history) >= -1e-15))

    def test_iteration_cap(self):
        """Hitting the iteration cap raises with the bracket reached."""
        solver = BlahutArimoto(Dmc([[1.0, 0.0], [0.5, 0.5]]), tol=1e-14, max_iterations=3)
        with self.assertRaises(NumericError) as raised:
            solver.solve()
        lower, upper = raised.exception.bracket
        self.assertLess(lower, upper)

    def test_invalid_tolerance(self):
        with self.assertRaises(ArgumentError):
            capacity(bsc(0.1), tol=0.0)


class BurnashevTest(unittest.TestCase):

    def test_bsc(self):
        """B of BSC(p) is D(p || 1-p), reached at the pair (0, 1)."""
        result = burnashev_b(bsc(0.1))
        self.assertEqual(result.value, kl_divergence([0.9, 0.1], [0.1, 0.9]))
        self.assertEqual((result.accept_symbol, result.reject_symbol), (0, 1))
        self.assertAlmostEqual(result.value, 2.53594, places=5)

    def test_identical_rows(self):
        self.assertEqual(burnashev_b(Dmc([[0.4, 0.6], [0.4, 0.6]])).value, 0.0)

    def test_single_input(self):
        result = burnashev_b(Dmc([[0.4, 0.6]]))
        self.assertEqual((result.value, result.accept_symbol, result.reject_symbol), (0.0, 0, 0))

    def test_disjoint_rows(self):
        self.assertEqual(burnashev_b(Dmc(IDENTITY)).value, math.inf)


class CompoundCapacityTest(unittest.TestCase):

    def test_single_member(self):
        family = CompoundFamily([Dmc(BEC_03)])
        self.assertAlmostEqual(compound_capacity_nofeedback(family), capacity(family[0])[0], delta=1e-9)
        self.assertAlmostEqual(compound_capacity_feedback(family), capacity(family[0])[0], delta=1e-9)

    def test_bsc_pair(self):
        """Uniform input is optimal for both members of the BSC pair."""
        expected = 1.0 - binary_entropy(0.1)
        self.assertAlmostEqual(compound_capacity_nofeedback(bsc_pair(0.1)), expected, delta=1e-6)
        self.assertAlmostEqual(compound_capacity_feedback(bsc_pair(0.1)), expected, delta=1e-6)
        np.testing.assert_allclose(capacity_vector(bsc_pair(0.1)), [expected, expected], atol=1e-6)

    def test_useless_member(self):
        family = CompoundFamily([Dmc(IDENTITY), bsc(0.5)])
        self.assertAlmostEqual(compound_capacity_nofeedback(family), 0.0, delta=1e-6)
        self.assertAlmostEqual(compound_capacity_feedback(family), 0.0, delta=1e-6)

    def test_ordering(self):
        """C_NF <= C_F <= every C_l, and C_NF matches a fine grid search."""
        family = CompoundFamily([Dmc([[1.0, 0.0], [0.5, 0.5]]), Dmc([[0.5, 0.5], [0.0, 1.0]]), bsc(0.2)])
        value, best = CompoundCapacitySolver(family).solve()
        self.assertLessEqual(value, compound_capacity_feedback(family) + 1e-9)
        self.assertTrue(np.all(capacity_vector(family) >= compound_capacity_feedback(family) - 1e-12))
        grid = simplex_grid(2, 2000)
        search = max(min(mutual_information(p, c) for c in family) for p in grid)
        self.assertAlmostEqual(value, search, delta=1e-5)
        self.assertAlmostEqual(min(mutual_information(best, c) for c in family), value, delta=1e-9)

    def test_stacked_channel_information(self):
        """I(P, stacked) = sum_l w_l I(P, Q_l)."""
        family = CompoundFamily([bsc(0.1), Dmc([[0.6, 0.4], [0.2, 0.8]])])
        weights = np.array([0.3, 0.7])
        p = np.array([0.4, 0.6])
        expected = sum(w * mutual_information(p, c) for w, c in zip(weights, family))
        self.assertAlmostEqual(mutual_information(p, stacked_channel(family, weights)), expected, places=12)


class GridTest(unittest.TestCase):

    def test_simplex_grid(self):
        grid = simplex_grid(3, 4)
        self.assertEqual(grid.shape, (simplex_grid_size(3, 4), 3))
        np.testing.assert_allclose(grid.sum(axis=1), 1.0)
        self.assertEqual(len({tuple(row) for row in grid}), grid.shape[0])

    def test_first_maximizer(self):
        """Near ties go to the smallest index."""
        self.assertEqual(first_maximizer([1.0, 3.0, 3.0 + 1e-12]), 1)
        self.assertEqual(first_maximizer([-np.inf, -np.inf]), 0)


class ExponentToolsTest(unittest.TestCase):

    def test_chernoff_symmetric_pair(self):
        """Chernoff information of the BSC rows is attained at tilt 1/2."""
        value, tilt = chernoff_information([0.9, 0.1], [0.1, 0.9])
        self.assertAlmostEqual(tilt, 0.5, places=5)
        self.assertAlmostEqual(value, -math.log2(2.0 * math.sqrt(0.09)), places=9)

    def test_chernoff_disjoint(self):
        self.assertEqual(chernoff_information([1.0, 0.0], [0.0, 1.0])[0], math.inf)

    def test_tilted_endpoints(self):
        np.testing.assert_allclose(tilted_distribution([0.9, 0.1], [0.2, 0.8], 0.0), [0.9, 0.1])
        np.testing.assert_allclose(tilted_distribution([0.9, 0.1], [0.2, 0.8], 1.0), [0.2, 0.8])

    def test_matched_density_moments(self):
        """Matched decoding: the mean is I(P, Q) and the variance the dispersion."""
        channel = bsc(0.1)
        mean, variance = information_density_moments([0.5, 0.5], channel, channel)
        self.assertAlmostEqual(mean, 1.0 - binary_entropy(0.1), places=12)
        self.assertAlmostEqual(variance, 0.09 * math.log2(9.0) ** 2, places=10)
        self.assertAlmostEqual(channel_dispersion(channel), variance, places=6)

    def test_mismatched_density_moments(self):
        """Decoding BSC(0.9) outputs with the BSC(0.1) metric gives a negative mean."""
        mean, _ = information_density_moments([0.5, 0.5], bsc(0.1), bsc(0.9))
        self.assertLess(mean, 0.0)

    def test_impossible_outputs(self):
        mean, variance = information_density_moments([0.5, 0.5], Dmc(IDENTITY), bsc(0.1))
        self.assertEqual((mean, variance), (-math.inf, math.inf))


if __name__ == '__main__':
    unittest.main()
