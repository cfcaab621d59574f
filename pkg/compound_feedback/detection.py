# -*- coding: utf-8 -*-
"""
Part of the compound_feedback package
Licensed under GPL v2+

Channel estimation from training, the control-phase hypothesis test and the
estimation error exponent regions.
"""
import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.special import rel_entr
from scipy.stats import binom

from .definitions import GRID_DEFAULTS, ITERATION_CAPS, LOG2E, SCHEME_DEFAULTS, TOLERANCES
from .exceptions import ArgumentError, CapabilityError
from .infotheory import (binary_kl, burnashev_b, first_maximizer, simplex_grid, simplex_grid_size,
                         weighted_chernoff)


class ControlDecision(enum.Enum):
    ACCEPT = 'ACCEPT'
    REJECT = 'REJECT'


@dataclass(frozen=True)
class TrainingSequence:
    """Known input symbols sent while the receiver estimates the channel."""
    symbols: tuple

    def __post_init__(self):
        if len(self.symbols) == 0:
            raise ArgumentError("Training sequence must be non-empty")
        if min(self.symbols) < 0:
            raise ArgumentError("Training symbols must be non-negative indices")

    @classmethod
    def all_zero(cls, length):
        return cls(tuple([0] * int(length)))

    @classmethod
    def round_robin(cls, num_inputs, length):
        """
        Cycles through every input symbol

        Args:
            num_inputs (int): Input alphabet size
            length (int): Sequence length

        Returns:
            TrainingSequence: 0, 1, ..., |X|-1, 0, 1, ...
        """
        return cls(tuple(int(s) for s in np.arange(int(length)) % num_inputs))

    def __len__(self):
        return len(self.symbols)

    def as_array(self):
        return np.asarray(self.symbols, dtype=np.int64)

    def composition(self, num_inputs):
        """
        Usage fraction of every input symbol

        Args:
            num_inputs (int): Input alphabet size

        Returns:
            np.ndarray: Fractions summing to 1
        """
        if max(self.symbols) >= num_inputs:
            raise ArgumentError(f"Training symbol out of range [0, {num_inputs})")
        return np.bincount(self.as_array(), minlength=num_inputs) / float(len(self))


@dataclass(frozen=True)
class ExponentTuple:
    """Pairwise exponents T^{l,k} (deciding k while l is true) and marginals T_l."""
    pairwise: np.ndarray
    marginal: np.ndarray

    @classmethod
    def from_pairwise(cls, pairwise):
        pairwise = np.array(pairwise, dtype=np.float64)
        return cls(pairwise, marginal_from_pairwise(pairwise))


def marginal_from_pairwise(pairwise):
    """
    Marginal exponents T_l = min over k != l of T^{l,k}

    Args:
        pairwise (array_like): L x L matrix, diagonal ignored

    Returns:
        np.ndarray: Length L vector, +inf for a single hypothesis
    """
    pairwise = np.array(pairwise, dtype=np.float64)
    if pairwise.ndim != 2 or pairwise.shape[0] != pairwise.shape[1]:
        raise ArgumentError("Pairwise exponents must form a square matrix")
    masked = pairwise.copy()
    np.fill_diagonal(masked, np.inf)
    return np.min(masked, axis=1)


def marginal_region_from_pairwise(tuples):
    """Maps every pairwise tuple of a set to its marginal vector."""
    return [marginal_from_pairwise(t) for t in tuples]


class EstimationRule:
    kind = None

    def __init__(self, family):
        """
        Args:
            family (CompoundFamily): Hypotheses the rule decides between
        """
        self.family = family

    def estimate(self, training, outputs):
        raise NotImplementedError

    def pairwise_exponents(self, composition):
        raise NotImplementedError

    def estimate_distribution(self, training, channel):
        """Exact law of the estimate under channel, None when the rule has no closed form."""
        return None

    def default_training(self, length):
        return TrainingSequence.round_robin(self.family.num_inputs, length)

    def training_composition(self):
        """Usage fractions of the default training sequence as its length grows."""
        return np.full(self.family.num_inputs, 1.0 / self.family.num_inputs)

    def _check_lengths(self, training, outputs):
        outputs = np.asarray(outputs, dtype=np.int64)
        if outputs.shape != (len(training),):
            raise ArgumentError(
                f"Got {outputs.size} outputs for a training sequence of length {len(training)}")
        return outputs

    def to_dict(self):
        return {'kind': self.kind}


class MaximumLikelihoodRule(EstimationRule):
    """Picks the channel maximizing the likelihood of the training outputs."""
    kind = 'ml'

    def __init__(self, family):
        super().__init__(family)
        with np.errstate(divide='ignore'):
            self._log_rows = np.stack([np.log2(c.rows) for c in family])

    def estimate(self, training, outputs):
        outputs = self._check_lengths(training, outputs)
        inputs = training.as_array()
        loglik = self._log_rows[:, inputs, outputs].sum(axis=1)
        return first_maximizer(loglik)

    def pairwise_exponents(self, composition):
        size = len(self.family)
        pairwise = np.zeros((size, size))
        for l in range(size):
            for k in range(l + 1, size):
                value, _ = weighted_chernoff(self.family[l].rows, self.family[k].rows, composition)
                pairwise[l, k] = pairwise[k, l] = value
        return pairwise


class BscThresholdRule(EstimationRule):
    kind = 'bsc-threshold'

    def __init__(self, family, q):
        """
        Threshold rule for the family {BSC(p), BSC(1-p)}: the flip frequency of
        the training outputs below q selects BSC(p)

        Args:
            family (CompoundFamily): Two complementary binary symmetric channels
            q (float): Threshold with p <= q <= 1-p

        Raises:
            ArgumentError: If the family is not a complementary BSC pair or q is out of range
        """
        super().__init__(family)
        crossovers = [bsc_crossover(c) for c in family]
        if len(family) != 2 or None in crossovers:
            raise ArgumentError("bsc-threshold needs a family of exactly two binary symmetric channels")
        if abs(crossovers[0] + crossovers[1] - 1.0) > TOLERANCES['row_sum'] or crossovers[0] == 0.5:
            raise ArgumentError("bsc-threshold needs crossovers p and 1-p with p != 1/2")
        self.low_index = int(np.argmin(crossovers))
        self.high_index = 1 - self.low_index
        self.p = crossovers[self.low_index]
        if not (self.p <= q <= 1.0 - self.p):
            raise ArgumentError(f"Threshold q={q} outside [{self.p}, {1.0 - self.p}]")
        self.q = float(q)

    def default_training(self, length):
        return TrainingSequence.all_zero(length)

    def training_composition(self):
        composition = np.zeros(self.family.num_inputs)
        composition[0] = 1.0
        return composition

    def estimate(self, training, outputs):
        outputs = self._check_lengths(training, outputs)
        flips = np.count_nonzero(outputs != training.as_array())
        if flips / float(len(training)) < self.q:
            return self.low_index
        return self.high_index

    def estimate_distribution(self, training, channel):
        """
        Exact law of the estimate: the flip count is Binomial(len(training), crossover)

        Args:
            training (TrainingSequence): The training sequence
            channel (Dmc): Channel producing the outputs

        Returns:
            np.ndarray: Probability of each estimate, None if channel is not a BSC
        """
        crossover = bsc_crossover(channel)
        if crossover is None:
            return None
        length = len(training)
        # largest flip count k with k / length < q, as estimate() compares it
        below = int(math.ceil(self.q * length)) - 1
        if (below + 1) / float(length) < self.q:
            below += 1
        if below >= 0 and below / float(length) >= self.q:
            below -= 1
        distribution = np.zeros(2)
        distribution[self.low_index] = binom.cdf(below, length, crossover)
        distribution[self.high_index] = binom.sf(below, length, crossover)
        return distribution

    def pairwise_exponents(self, composition):
        pairwise = np.zeros((2, 2))
        pairwise[self.low_index, self.high_index] = binary_kl(self.q, self.p)
        pairwise[self.high_index, self.low_index] = binary_kl(self.q, 1.0 - self.p)
        return pairwise

    def to_dict(self):
        return {'kind': self.kind, 'q': self.q}


def bsc_crossover(channel):
    """Crossover probability of a binary symmetric channel, None for any other channel."""
    rows = channel.rows
    if rows.shape != (2, 2) or rows[0, 1] != rows[1, 0]:
        return None
    return float(rows[0, 1])


def make_rule(family, kind, q=None):
    """
    Builds an estimation rule by name

    Args:
        family (CompoundFamily): The family
        kind (str): 'ml' or 'bsc-threshold'
        q (float, optional): Threshold of the bsc-threshold rule

    Returns:
        EstimationRule: The rule
    """
    if kind == MaximumLikelihoodRule.kind:
        return MaximumLikelihoodRule(family)
    if kind == BscThresholdRule.kind:
        if q is None:
            raise ArgumentError("bsc-threshold needs a threshold q")
        return BscThresholdRule(family, q)
    raise ArgumentError(f"Unknown estimation rule '{kind}'")


def estimate_channel(rule, training, outputs):
    """
    Channel estimate from the outputs of a training sequence

    Args:
        rule (EstimationRule): Decision rule
        training (TrainingSequence): Inputs that were sent
        outputs (array_like): Observed outputs, same length

    Returns:
        int: Estimated channel index
    """
    return rule.estimate(training, outputs)


def estimation_exponents(rule, composition):
    """
    Error exponents of a rule for training with the given composition

    Args:
        rule (EstimationRule): Decision rule
        composition (array_like): Usage fraction of every input symbol

    Returns:
        ExponentTuple: Pairwise and marginal exponents in bits per use
    """
    composition = np.asarray(composition, dtype=np.float64)
    if (composition.shape != (rule.family.num_inputs,) or np.any(composition < 0)
            or abs(composition.sum() - 1.0) > 1e-9):
        raise ArgumentError("Composition must be a distribution over the input alphabet")
    return ExponentTuple.from_pairwise(rule.pairwise_exponents(composition))


@dataclass
class ControlTest:
    """One-sided likelihood ratio test between the accept and reject symbols of each channel."""
    accept_symbols: tuple
    reject_symbols: tuple
    divergences: tuple
    llr_tables: tuple = field(repr=False)
    slack_exponent: float = SCHEME_DEFAULTS['slack_exponent']

    @classmethod
    def from_family(cls, family, slack_exponent=None):
        """
        Uses the Burnashev symbols of every family member

        Args:
            family (CompoundFamily): The family
            slack_exponent (float, optional): delta(m) = m ** -slack_exponent, in (0, 1)

        Returns:
            ControlTest: The test
        """
        slack_exponent = SCHEME_DEFAULTS['slack_exponent'] if slack_exponent is None else slack_exponent
        if not (0.0 < slack_exponent < 1.0):
            raise ArgumentError("Slack exponent must lie in (0, 1)")
        accepts, rejects, divergences, tables = [], [], [], []
        for channel in family:
            result = burnashev_b(channel)
            accepts.append(result.accept_symbol)
            rejects.append(result.reject_symbol)
            divergences.append(result.value)
            with np.errstate(divide='ignore', invalid='ignore'):
                table = np.log2(channel.rows[result.accept_symbol]) - np.log2(channel.rows[result.reject_symbol])
            table.setflags(write=False)
            tables.append(table)
        return cls(tuple(accepts), tuple(rejects), tuple(divergences), tuple(tables), slack_exponent)

    def for_channel(self, channel_index):
        """Single-member test holding the symbols and log-likelihood table of one channel."""
        return ControlTest((self.accept_symbols[channel_index],), (self.reject_symbols[channel_index],),
                           (self.divergences[channel_index],), (self.llr_tables[channel_index],),
                           self.slack_exponent)

    def slack(self, m):
        return float(m) ** -self.slack_exponent

    def symbols(self, channel_index, accept):
        """Control symbol of a channel for the accept or reject hypothesis."""
        return self.accept_symbols[channel_index] if accept else self.reject_symbols[channel_index]

    def decide(self, channel_index, outputs):
        """
        Decides between the accept and reject hypotheses

        Args:
            channel_index (int): Channel whose control symbols were used
            outputs (array_like): Observed outputs

        Returns:
            ControlDecision: ACCEPT iff the mean log-likelihood ratio reaches D - delta(m)
        """
        outputs = np.asarray(outputs, dtype=np.int64)
        if outputs.size == 0:
            raise ArgumentError("Control test needs at least one observation")
        terms = self.llr_tables[channel_index][outputs]
        if np.any(np.isneginf(terms)):
            return ControlDecision.REJECT
        divergence = self.divergences[channel_index]
        if np.isinf(divergence):
            # zero-error signalling: only an output impossible under x_R accepts
            return ControlDecision.ACCEPT if np.any(np.isposinf(terms)) else ControlDecision.REJECT
        terms = np.where(np.isnan(terms), 0.0, terms)
        if terms.mean() >= divergence - self.slack(outputs.size):
            return ControlDecision.ACCEPT
        return ControlDecision.REJECT


def control_decide(test, channel_index, outputs):
    """Control-phase decision, see ControlTest.decide."""
    return test.decide(channel_index, outputs)


def build_control_tests(family, slack_exponent=None):
    """
    Control test of every family member

    Returns:
        list: One single-member ControlTest per channel, in family order, each deciding at index 0
    """
    test = ControlTest.from_family(family, slack_exponent)
    return [test.for_channel(index) for index in range(len(family))]


def default_training(rule, length):
    return rule.default_training(length)


def composition(training, num_inputs):
    return training.composition(num_inputs)


class TuncelRegion:
    def __init__(self, output_laws, composition=None, resolution=None, tol=None):
        """
        Achievable pairwise exponents of L-ary hypothesis testing with
        independent observations

        Args:
            output_laws (array_like): L x |Y| laws, or L x |X| x |Y| per input symbol
            composition (array_like, optional): Input usage fractions for per-symbol laws
            resolution (int, optional): Grid points per unit of every simplex coordinate
            tol (float, optional): Margin tolerated below zero

        Raises:
            CapabilityError: If the output alphabet or grid is too large
        """
        laws = np.asarray(output_laws, dtype=np.float64)
        if laws.ndim == 2:
            laws = laws[:, None, :]
            composition = np.ones(1)
        elif composition is None:
            raise ArgumentError("Per-symbol output laws need a composition")
        composition = np.asarray(composition, dtype=np.float64)
        used = composition > 0
        self.laws = laws[:, used, :]
        self.weights = composition[used]
        self.size = laws.shape[0]
        self.num_outputs = laws.shape[2]
        self.resolution = resolution or GRID_DEFAULTS['simplex_resolution']
        self.tol = TOLERANCES['region'] if tol is None else tol
        if self.resolution < 10:
            raise ArgumentError("Grid resolution must be at least 10")
        if self.num_outputs > 5:
            raise CapabilityError(f"Output alphabet of size {self.num_outputs} too large for the simplex grid")
        blocks = self.weights.size
        count = simplex_grid_size(self.num_outputs, self.resolution) ** blocks
        if count > GRID_DEFAULTS['max_region_grid_points']:
            raise CapabilityError(f"Region grid of {count} points exceeds the configured limit")
        self.grid = simplex_grid(self.num_outputs, self.resolution)

    def _divergences(self, points):
        # points: (G, blocks, |Y|) -> (G, L) weighted divergences in bits
        with np.errstate(divide='ignore', invalid='ignore'):
            terms = rel_entr(points[:, None, :, :], self.laws[None, :, :, :]).sum(axis=3) * LOG2E
        return terms @ self.weights

    def _grid_divergences(self):
        # product grid over the used input symbols
        blocks = self.weights.size
        per_block = np.stack([rel_entr(self.grid[:, None, :], self.laws[None, :, b, :]).sum(axis=2) * LOG2E
                              for b in range(blocks)])
        total = np.zeros((1, self.size))
        for b in range(blocks):
            total = (total[:, None, :] + self.weights[b] * per_block[b][None, :, :]).reshape(-1, self.size)
        return total

    def _margins(self, divergences, pairwise):
        # margin(p) = max_k min_{l != k} D_l(p) - T[l, k]
        with np.errstate(invalid='ignore'):
            slack = divergences[:, :, None] - pairwise[None, :, :]
        slack = np.where(np.isnan(slack), 0.0, slack)
        for l in range(self.size):
            slack[:, l, l] = np.inf
        return np.max(np.min(slack, axis=1), axis=1)

    def _grid_index_to_point(self, index):
        blocks = self.weights.size
        g = self.grid.shape[0]
        coords = np.unravel_index(index, (g,) * blocks)
        return np.stack([self.grid[c] for c in coords])

    def _refine(self, start, pairwise):
        blocks, dim = start.shape

        def unpack(z):
            heads = z.reshape(blocks, dim - 1)
            tails = 1.0 - heads.sum(axis=1, keepdims=True)
            return np.hstack([heads, tails])

        def objective(z):
            points = unpack(z)
            if np.any(points < 0.0):
                return np.inf
            return float(self._margins(self._divergences(points[None, :, :]), pairwise)[0])

        z0 = start[:, :-1].ravel()
        step = 1.0 / self.resolution
        simplex = [z0]
        for i in range(z0.size):
            vertex = z0.copy()
            vertex[i] += step if vertex[i] + step <= 1.0 else -step
            simplex.append(vertex)
        result = minimize(objective, z0, method='Nelder-Mead',
                          options={'initial_simplex': np.array(simplex), 'xatol': 1e-12, 'fatol': 1e-14,
                                   'maxiter': ITERATION_CAPS['nelder_mead']})
        return min(float(result.fun), objective(z0))

    def worst_margin(self, pairwise):
        """
        Smallest margin over the grid, refined locally around the worst point

        Args:
            pairwise (array_like): Candidate L x L exponent tuple

        Returns:
            float: Negative iff some output law defeats every decision
        """
        pairwise = np.asarray(pairwise, dtype=np.float64)
        if pairwise.shape != (self.size, self.size):
            raise ArgumentError(f"Expected a {self.size}x{self.size} exponent tuple")
        if self.size == 1:
            return np.inf
        margins = self._margins(self._grid_divergences(), pairwise)
        worst = int(np.argmin(margins))
        if margins[worst] < -self.tol or self.num_outputs == 1:
            return float(margins[worst])
        return min(float(margins[worst]), self._refine(self._grid_index_to_point(worst), pairwise))

    def contains(self, pairwise):
        return self.worst_margin(pairwise) >= -self.tol


def tuncel_member(pairwise, output_laws, resolution=None, composition=None):
    """
    Whether a pairwise exponent tuple is achievable

    For every output law p some decision k must satisfy D(p||p_l) >= T^{l,k}
    for all l != k.

    Args:
        pairwise (array_like): Candidate L x L tuple
        output_laws (array_like): Output laws of the hypotheses
        resolution (int, optional): Simplex grid resolution
        composition (array_like, optional): Training composition for per-symbol laws

    Returns:
        bool: Membership
    """
    return TuncelRegion(output_laws, composition, resolution).contains(pairwise)
