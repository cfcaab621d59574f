# coding=utf-8
"""Tests of channel estimation, the control test and the exponent regions."""

import itertools
import math
import unittest

import numpy as np
from scipy.stats import binom

from ..channel_core import CompoundFamily, bsc, bsc_pair, sample_block, session_rng
from ..detection import (BscThresholdRule, ControlDecision, ControlTest, MaximumLikelihoodRule,
                         TrainingSequence, TuncelRegion, build_control_tests, control_decide,
                         estimate_channel, estimation_exponents, make_rule, marginal_from_pairwise,
                         marginal_region_from_pairwise, tuncel_member)
from ..exceptions import ArgumentError, CapabilityError
from ..infotheory import binary_kl, kl_divergence, tilted_distribution
from .utilities import IDENTITY

FLIP = [[0.0, 1.0], [1.0, 0.0]]
LOG2_9 = math.log2(9.0)


def error_rate(rule, family, true_index, training, trials, seed):
    """Fraction of training rounds in which the rule misses the true channel."""
    errors = 0
    for trial in range(trials):
        outputs = sample_block(family[true_index], training.as_array(), session_rng(seed, trial))
        errors += estimate_channel(rule, training, outputs) != true_index
    return errors / float(trials)


class TrainingSequenceTest(unittest.TestCase):

    def test_round_robin(self):
        training = TrainingSequence.round_robin(3, 7)
        self.assertEqual(training.symbols, (0, 1, 2, 0, 1, 2, 0))
        np.testing.assert_allclose(training.composition(3), [3 / 7, 2 / 7, 2 / 7])

    def test_empty(self):
        with self.assertRaises(ArgumentError):
            TrainingSequence(())

    def test_symbol_out_of_range(self):
        with self.assertRaises(ArgumentError):
            TrainingSequence((0, 2)).composition(2)

    def test_default_training(self):
        family = bsc_pair(0.1)
        self.assertEqual(BscThresholdRule(family, 0.5).default_training(4).symbols, (0, 0, 0, 0))
        self.assertEqual(MaximumLikelihoodRule(family).default_training(4).symbols, (0, 1, 0, 1))


class EstimateChannelTest(unittest.TestCase):

    def test_identity_against_flip(self):
        rule = MaximumLikelihoodRule(CompoundFamily([IDENTITY, FLIP]))
        self.assertEqual(estimate_channel(rule, TrainingSequence((0, 0)), [0, 0]), 0)
        self.assertEqual(estimate_channel(rule, TrainingSequence((0, 0)), [1, 1]), 1)

    def test_exact_tie_goes_to_smallest_index(self):
        for family in (bsc_pair(0.1), CompoundFamily([bsc(0.9), bsc(0.1)])):
            rule = MaximumLikelihoodRule(family)
            self.assertEqual(estimate_channel(rule, TrainingSequence((0, 0)), [0, 1]), 0)

    def test_threshold_thirty_ones(self):
        """30 ones out of 100 with q = 1/2 select BSC(0.1), wherever it sits in the family."""
        outputs = [1] * 30 + [0] * 70
        training = TrainingSequence.all_zero(100)
        self.assertEqual(estimate_channel(BscThresholdRule(bsc_pair(0.1), 0.5), training, outputs), 0)
        reversed_pair = CompoundFamily([bsc(0.9), bsc(0.1)])
        self.assertEqual(estimate_channel(BscThresholdRule(reversed_pair, 0.5), training, outputs), 1)

    def test_threshold_boundary(self):
        """A flip frequency equal to q selects BSC(1-p)."""
        rule = BscThresholdRule(bsc_pair(0.1), 0.5)
        self.assertEqual(estimate_channel(rule, TrainingSequence.all_zero(4), [1, 1, 0, 0]), 1)

    def test_threshold_estimate_distribution(self):
        """The binomial law of the estimate equals the sum over every output sequence."""
        training = TrainingSequence.all_zero(10)
        for family in (bsc_pair(0.1), CompoundFamily([bsc(0.9), bsc(0.1)])):
            for q in (0.1, 0.3, 0.5, 0.9):
                rule = BscThresholdRule(family, q)
                for channel in family:
                    expected = np.zeros(2)
                    for outputs in itertools.product((0, 1), repeat=10):
                        flips = sum(outputs)
                        probability = channel.rows[0, 1] ** flips * channel.rows[0, 0] ** (10 - flips)
                        expected[rule.estimate(training, outputs)] += probability
                    np.testing.assert_allclose(rule.estimate_distribution(training, channel), expected,
                                               atol=1e-14)
        self.assertIsNone(MaximumLikelihoodRule(bsc_pair(0.1)).estimate_distribution(training, bsc(0.1)))

    def test_length_mismatch(self):
        rule = MaximumLikelihoodRule(bsc_pair(0.1))
        with self.assertRaises(ArgumentError):
            estimate_channel(rule, TrainingSequence.all_zero(3), [0, 0])

    def test_threshold_needs_bsc_pair(self):
        with self.assertRaises(ArgumentError):
            BscThresholdRule(CompoundFamily([bsc(0.1), bsc(0.8)]), 0.5)
        with self.assertRaises(ArgumentError):
            BscThresholdRule(CompoundFamily([IDENTITY, [[0.5, 0.5], [0.5, 0.5]]]), 0.5)
        with self.assertRaises(ArgumentError):
            BscThresholdRule(bsc_pair(0.1), 0.95)

    def test_make_rule(self):
        self.assertIsInstance(make_rule(bsc_pair(0.1), 'ml'), MaximumLikelihoodRule)
        self.assertEqual(make_rule(bsc_pair(0.1), 'bsc-threshold', 0.4).to_dict(),
                         {'kind': 'bsc-threshold', 'q': 0.4})
        with self.assertRaises(ArgumentError):
            make_rule(bsc_pair(0.1), 'bsc-threshold')
        with self.assertRaises(ArgumentError):
            make_rule(bsc_pair(0.1), 'bayes')


class EstimationErrorTest(unittest.TestCase):
    """Monte Carlo checks of the training phase error probability."""

    def test_hoeffding_bound(self):
        """Error of the threshold rule stays below three times 2^(-m D(q||p))."""
        family = bsc_pair(0.1)
        rule = BscThresholdRule(family, 0.5)
        for m in (50, 100, 200):
            bound = 2.0 ** (-m * binary_kl(0.5, 0.1))
            rate = error_rate(rule, family, 0, TrainingSequence.all_zero(m), 5000, m)
            self.assertLessEqual(rate, 3.0 * bound)

    def test_ml_not_worse_than_threshold(self):
        """On an odd length all-zero training the two rules make the same decisions."""
        family = bsc_pair(0.3)
        training = TrainingSequence.all_zero(9)
        trials = 20000
        for true_index in (0, 1):
            ml = error_rate(MaximumLikelihoodRule(family), family, true_index, training, trials, 17)
            threshold = error_rate(BscThresholdRule(family, 0.5), family, true_index, training, trials, 17)
            sigma = math.sqrt(max(threshold, 1.0 / trials) / trials)
            self.assertLessEqual(ml, 2.0 * threshold + 3.0 * sigma)


class EstimationExponentsTest(unittest.TestCase):

    def test_threshold_half(self):
        exponents = estimation_exponents(BscThresholdRule(bsc_pair(0.1), 0.5), [1.0, 0.0])
        self.assertAlmostEqual(exponents.pairwise[0, 1], 0.73697, places=5)
        self.assertAlmostEqual(exponents.pairwise[1, 0], 0.73697, places=5)
        np.testing.assert_allclose(exponents.marginal, [math.log2(5.0 / 3.0)] * 2, rtol=1e-12)

    def test_threshold_at_crossover(self):
        """q = p leaves no margin for BSC(p)."""
        exponents = estimation_exponents(BscThresholdRule(bsc_pair(0.1), 0.1), [1.0, 0.0])
        self.assertEqual(exponents.marginal[0], 0.0)

    def test_threshold_asymmetric(self):
        """q = 0.3: (D(0.3||0.1), D(0.3||0.9)) from the binary divergence closed form."""
        exponents = estimation_exponents(BscThresholdRule(bsc_pair(0.1), 0.3), [1.0, 0.0])
        low = 0.3 * math.log2(3.0) + 0.7 * math.log2(7.0 / 9.0)
        high = 0.3 * math.log2(1.0 / 3.0) + 0.7 * math.log2(7.0)
        np.testing.assert_allclose(exponents.marginal, [low, high], rtol=1e-12)
        self.assertAlmostEqual(low, 0.22169, places=5)
        self.assertAlmostEqual(high, 1.48966, places=5)

    def test_ml_matches_midpoint_threshold(self):
        """ML on all-zero training has the Chernoff exponent -log2(2 sqrt(p(1-p)))."""
        exponents = estimation_exponents(MaximumLikelihoodRule(bsc_pair(0.1)), [1.0, 0.0])
        np.testing.assert_allclose(exponents.pairwise, [[0.0, math.log2(5.0 / 3.0)],
                                                        [math.log2(5.0 / 3.0), 0.0]], atol=1e-9)

    def test_ml_composition_weighting(self):
        """Symbols on which two channels agree contribute nothing."""
        family = CompoundFamily([IDENTITY, [[1.0, 0.0], [0.5, 0.5]]])
        rule = MaximumLikelihoodRule(family)
        self.assertEqual(estimation_exponents(rule, [1.0, 0.0]).marginal[0], 0.0)
        self.assertAlmostEqual(estimation_exponents(rule, [0.5, 0.5]).marginal[0], 0.5, places=5)

    def test_invalid_composition(self):
        with self.assertRaises(ArgumentError):
            estimation_exponents(MaximumLikelihoodRule(bsc_pair(0.1)), [0.7, 0.7])
        with self.assertRaises(ArgumentError):
            estimation_exponents(MaximumLikelihoodRule(bsc_pair(0.1)), [1.0])


class MarginalTest(unittest.TestCase):

    def test_two_channels(self):
        np.testing.assert_array_equal(marginal_from_pairwise([[0.0, 0.3], [0.7, 0.0]]), [0.3, 0.7])

    def test_three_channels(self):
        pairwise = [[0.0, 0.2, 0.5], [1.0, 0.0, 0.4], [0.3, 0.9, 0.0]]
        np.testing.assert_array_equal(marginal_from_pairwise(pairwise), [0.2, 0.4, 0.3])

    def test_zero_and_single(self):
        np.testing.assert_array_equal(marginal_from_pairwise(np.zeros((3, 3))), np.zeros(3))
        self.assertEqual(marginal_from_pairwise([[0.0]])[0], math.inf)

    def test_region(self):
        tuples = [np.zeros((2, 2)), [[0.0, 1.0], [2.0, 0.0]]]
        marginals = marginal_region_from_pairwise(tuples)
        np.testing.assert_array_equal(marginals[1], [1.0, 2.0])

    def test_not_square(self):
        with self.assertRaises(ArgumentError):
            marginal_from_pairwise([[0.0, 1.0]])


class ControlTestTest(unittest.TestCase):

    def setUp(self):
        self.test = ControlTest.from_family(bsc_pair(0.1))

    def accept_count(self, symbol, m, trials, seed):
        outputs = sample_block(bsc(0.1), np.full(m * trials, symbol), session_rng(seed, m))
        decisions = (control_decide(self.test, 0, row) for row in outputs.reshape(trials, m))
        return sum(decision is ControlDecision.ACCEPT for decision in decisions)

    def test_symbols(self):
        d = kl_divergence([0.9, 0.1], [0.1, 0.9])
        tests = build_control_tests(bsc_pair(0.1))
        self.assertEqual(len(tests), 2)
        for test in tests:
            self.assertIsInstance(test, ControlTest)
            self.assertEqual((test.accept_symbols, test.reject_symbols), ((0,), (1,)))
            self.assertAlmostEqual(test.divergences[0], d)

    def test_per_channel_tests_decide(self):
        """Each per-channel test accepts a clean accept run and rejects a reject run."""
        family = CompoundFamily([bsc(0.1).rows, IDENTITY])
        tests = build_control_tests(family)
        self.assertIs(tests[0].decide(0, [0] * 40), ControlDecision.ACCEPT)
        self.assertIs(tests[0].decide(0, [1] * 40), ControlDecision.REJECT)
        self.assertIs(tests[1].decide(0, [0, 0, 0]), ControlDecision.ACCEPT)
        self.assertIs(tests[1].decide(0, [0, 1, 0]), ControlDecision.REJECT)
        self.assertEqual(tests[1].slack_exponent, tests[0].slack_exponent)

    def test_noiseless(self):
        test = ControlTest.from_family(CompoundFamily([IDENTITY]))
        self.assertIs(control_decide(test, 0, [0, 0, 0]), ControlDecision.ACCEPT)
        self.assertIs(control_decide(test, 0, [0, 1, 0]), ControlDecision.REJECT)

    def test_zero_error_signalling(self):
        """With B infinite only an output impossible under x_R accepts."""
        test = ControlTest.from_family(CompoundFamily([[[1.0, 0.0], [0.5, 0.5]]]))
        self.assertEqual((test.accept_symbols[0], test.reject_symbols[0]), (1, 0))
        self.assertIs(control_decide(test, 0, [0] * 50), ControlDecision.REJECT)
        self.assertIs(control_decide(test, 0, [0] * 50 + [1]), ControlDecision.ACCEPT)

    def test_impossible_under_accept_rejects(self):
        test = ControlTest.from_family(CompoundFamily([[[0.5, 0.5, 0.0], [0.0, 0.5, 0.5]]]))
        self.assertIs(control_decide(test, 0, [1, 1, 0]), ControlDecision.ACCEPT)
        self.assertIs(control_decide(test, 0, [1, 1]), ControlDecision.REJECT)
        self.assertIs(control_decide(test, 0, [0, 0, 2]), ControlDecision.REJECT)

    def test_threshold_on_flip_count(self):
        """With m = 200 the test accepts exactly when at most 28 outputs are ones."""
        m = 200
        for ones in range(m + 1):
            outputs = [1] * ones + [0] * (m - ones)
            expected = ControlDecision.ACCEPT if ones <= 28 else ControlDecision.REJECT
            self.assertIs(control_decide(self.test, 0, outputs), expected)

    def test_reject_side_exponent(self):
        """-log2 P(ACCEPT | x_R) / m lies within 25% of D(0.9||0.1)."""
        m = 200
        accept_probability = binom.cdf(28, m, 0.9)
        exponent = -math.log2(accept_probability) / m
        self.assertAlmostEqual(exponent, 0.8 * LOG2_9, delta=0.25 * 0.8 * LOG2_9)
        self.assertEqual(self.accept_count(1, m, 2000, 5), 0)

    def test_accept_side(self):
        """Under x_A the test rejects less than 5% of the time."""
        trials = 20000
        rejected = trials - self.accept_count(0, 200, trials, 6)
        self.assertLess(rejected / trials, 0.05)

    def test_accept_side_error_vanishes(self):
        trials = 10000
        early = trials - self.accept_count(0, 100, trials, 8)
        late = trials - self.accept_count(0, 400, trials, 8)
        self.assertLess(late, early)

    def test_slack(self):
        self.assertAlmostEqual(self.test.slack(16), 0.5, places=15)
        with self.assertRaises(ArgumentError):
            ControlTest.from_family(bsc_pair(0.1), slack_exponent=1.0)

    def test_empty_outputs(self):
        with self.assertRaises(ArgumentError):
            control_decide(self.test, 0, [])


class TuncelRegionTest(unittest.TestCase):

    def setUp(self):
        self.laws = np.array([[0.9, 0.1], [0.1, 0.9]])

    def boundary_tuple(self, lam):
        r = tilted_distribution(self.laws[0], self.laws[1], lam)
        return np.array([[0.0, kl_divergence(r, self.laws[0])], [kl_divergence(r, self.laws[1]), 0.0]])

    def test_zero_tuple(self):
        self.assertTrue(tuncel_member(np.zeros((2, 2)), self.laws))
        laws = np.array([[0.7, 0.2, 0.1], [0.1, 0.3, 0.6], [0.3, 0.4, 0.3]])
        self.assertTrue(tuncel_member(np.zeros((3, 3)), laws))

    def test_boundary_tuples(self):
        for lam in (0.3, 0.5, 0.7):
            self.assertTrue(tuncel_member(self.boundary_tuple(lam), self.laws))

    def test_inflated_tuples(self):
        for lam in (0.3, 0.5, 0.7):
            inflated = self.boundary_tuple(lam) + 0.01 * (1.0 - np.eye(2))
            self.assertFalse(tuncel_member(inflated, self.laws))

    def test_monotone(self):
        member = self.boundary_tuple(0.4)
        self.assertTrue(tuncel_member(0.5 * member, self.laws))
        smaller = member.copy()
        smaller[0, 1] = 0.0
        self.assertTrue(tuncel_member(smaller, self.laws))

    def test_per_symbol_laws(self):
        """Blocked observations weight the divergences by the composition."""
        laws = np.stack([bsc(0.1).rows, bsc(0.9).rows])
        region = TuncelRegion(laws, composition=[1.0, 0.0])
        self.assertTrue(region.contains(self.boundary_tuple(0.5)))
        self.assertFalse(region.contains(self.boundary_tuple(0.5) + 0.01))

    def test_capability(self):
        laws = np.full((2, 6), 1.0 / 6.0)
        with self.assertRaises(CapabilityError):
            tuncel_member(np.zeros((2, 2)), laws)

    def test_coarse_grid_rejected(self):
        with self.assertRaises(ArgumentError):
            tuncel_member(np.zeros((2, 2)), self.laws, resolution=5)


if __name__ == '__main__':
    unittest.main()
