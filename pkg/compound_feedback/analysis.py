# -*- coding: utf-8 -*-
"""
Part of the compound_feedback package
Licensed under GPL v2+

Closed-form exponent bounds, the scaled exponent curves of the BSC pair and
the exact single-epoch oracle.
"""
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

from .codebook import RandomCodebook, SurrogateCodebook
from .definitions import ENUMERATION_LIMITS, GRID_DEFAULTS, TOLERANCES
from .detection import ControlDecision
from .exceptions import ArgumentError, CapabilityError, InfeasibleRateError, NumericError
from .feedback import log_to
from .infotheory import binary_kl, burnashev_b, capacity_vector


@dataclass(frozen=True)
class ExponentPoint:
    """Per-channel error exponents in bits per channel use."""
    values: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if any(math.isnan(v) or v < 0.0 for v in values):
            raise ArgumentError(f"Exponents must be non-negative, got {values}")
        object.__setattr__(self, 'values', values)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, index):
        return self.values[index]

    def as_array(self):
        return np.array(self.values)


@dataclass
class RegionCurve:
    """Exponent points along a strictly increasing parameter grid."""
    parameters: np.ndarray
    points: list
    labels: tuple
    start_limit: ExponentPoint = None
    end_limit: ExponentPoint = None

    def __post_init__(self):
        self.parameters = np.asarray(self.parameters, dtype=np.float64)
        if len(self.points) != self.parameters.size:
            raise ArgumentError("A curve needs one point per grid parameter")
        if self.parameters.size > 1 and np.any(np.diff(self.parameters) <= 0):
            raise ArgumentError("Curve parameters must be strictly increasing")

    def __len__(self):
        return len(self.points)

    def as_array(self):
        return np.array([p.values for p in self.points])


def _feasible_gamma(family, rates):
    rates = np.asarray(rates, dtype=np.float64)
    if rates.shape != (len(family),):
        raise ArgumentError(f"Expected {len(family)} rates")
    capacities = capacity_vector(family)
    for index, (rate, cap) in enumerate(zip(rates, capacities)):
        if rate < 0 or rate >= cap:
            raise InfeasibleRateError(f"channel {index}: rate {rate:.6f} outside [0, {cap:.6f})")
    return rates / capacities


def _burnashev_vector(family):
    return np.array([burnashev_b(channel).value for channel in family])


def trivial_upper_bound(family, rates):
    """
    Burnashev bound E_l <= B_l (1 - R_l / C_l)

    Args:
        family (CompoundFamily): The family
        rates (array_like): Rates R_l below capacity

    Returns:
        ExponentPoint: Upper bound per channel
    """
    gamma = _feasible_gamma(family, rates)
    return ExponentPoint(tuple(_burnashev_vector(family) * (1.0 - gamma)))


def _series_product(t, b):
    # t b / (t + b), with the limits for infinite arguments
    if np.isinf(t) and np.isinf(b):
        return np.inf
    if np.isinf(t):
        return b
    if np.isinf(b):
        return t
    if t + b == 0.0:
        return 0.0
    return t * b / (t + b)


def eer_lower_bound(family, rates, control_exponents):
    """
    Achievable exponents E_l >= T_{c,l} / (T_{c,l} + B_l) * B_l * (1 - R_l / C_l)

    Args:
        family (CompoundFamily): The family
        rates (array_like): Rates R_l below capacity
        control_exponents (array_like): Marginal exponents T_{c,l} of the control training rule

    Returns:
        ExponentPoint: Lower bound per channel
    """
    gamma = _feasible_gamma(family, rates)
    exponents = np.asarray(control_exponents, dtype=np.float64)
    if exponents.shape != (len(family),) or np.any(exponents < 0):
        raise ArgumentError("Control exponents must be non-negative, one per channel")
    burnashev = _burnashev_vector(family)
    return ExponentPoint(tuple(_series_product(t, b) * (1.0 - g)
                               for t, b, g in zip(exponents, burnashev, gamma)))


def capacity_region_corner(family):
    """Upper corner (C_0, ..., C_{L-1}) of the opportunistic capacity region."""
    return capacity_vector(family)


def exponent_region_boundary(family, rates, control_exponent_grid, parameters=None):
    """
    Lower-bound exponent points for a sweep of control training rules

    Args:
        family (CompoundFamily): The family
        rates (array_like): Rates R_l
        control_exponent_grid (list): T_c vectors, one per rule
        parameters (array_like, optional): Rule parameters, defaults to 0, 1, ...

    Returns:
        RegionCurve: One eer_lower_bound point per rule
    """
    if parameters is None:
        parameters = np.arange(len(control_exponent_grid), dtype=np.float64)
    points = [eer_lower_bound(family, rates, t) for t in control_exponent_grid]
    labels = tuple(f"E_{index}" for index in range(len(family)))
    return RegionCurve(parameters, points, labels)


def phi_point(p, q):
    """
    Exponents of the BSC pair normalized by B (1 - gamma)

    Args:
        p (float): Crossover, 0 < p < 1/2
        q (float): Control threshold in the closed interval [p, 1-p]

    Returns:
        ExponentPoint: (D(q||p) / (D(q||p) + D(p||1-p)), D(q||1-p) / (D(q||1-p) + D(p||1-p)))
    """
    if not (0.0 < p < 0.5):
        raise ArgumentError(f"Crossover {p} outside (0, 1/2)")
    if not (p <= q <= 1.0 - p):
        raise ArgumentError(f"Threshold {q} outside [{p}, {1.0 - p}]")
    burnashev = binary_kl(p, 1.0 - p)
    low = binary_kl(q, p)
    high = binary_kl(q, 1.0 - p)
    return ExponentPoint((low / (low + burnashev), high / (high + burnashev)))


def phi_grid(p, grid_size=None):
    """Uniform interior grid p + (1 - 2p) i / (G + 1), i = 1..G."""
    grid_size = grid_size or GRID_DEFAULTS['phi_grid_size']
    if grid_size < 1:
        raise ArgumentError("Grid size must be positive")
    return p + (1.0 - 2.0 * p) * np.arange(1, grid_size + 1) / float(grid_size + 1)


def phi_curve(p, grid=None, grid_size=None):
    """
    Scaled exponent region of the BSC pair swept over the control threshold

    Args:
        p (float): Crossover, 0 < p < 1/2
        grid (array_like, optional): Thresholds inside (p, 1-p)
        grid_size (int, optional): Size of the default uniform grid

    Returns:
        RegionCurve: Curve with the analytic endpoint limits attached
    """
    if not (0.0 < p < 0.5):
        raise ArgumentError(f"Crossover {p} outside (0, 1/2)")
    grid = phi_grid(p, grid_size) if grid is None else np.asarray(grid, dtype=np.float64)
    if np.any(grid <= p) or np.any(grid >= 1.0 - p):
        raise ArgumentError(f"Thresholds must lie in the open interval ({p}, {1.0 - p})")
    points = [phi_point(p, q) for q in grid]
    return RegionCurve(grid, points, labels=('E_p/B_p', 'E_1-p/B_1-p'),
                       start_limit=phi_point(p, p), end_limit=phi_point(p, 1.0 - p))


def select_operating_point(curve, weights=None, feedback=None):
    """
    Grid parameter maximizing the smallest exponent

    For vanishing error probabilities a weighted error sum is dominated by the
    smallest exponent, so the weights do not change the choice.

    Args:
        curve (RegionCurve): Candidate points
        weights (array_like, optional): Positive per-channel weights, recorded only
        feedback (Feedback, optional): Feedback object for reporting logs

    Returns:
        float: The chosen grid parameter
    """
    if len(curve) == 0:
        raise ArgumentError("Cannot select from an empty curve")
    if weights is not None and np.any(np.asarray(weights, dtype=np.float64) <= 0):
        raise ArgumentError("Weights must be positive")
    worst = np.min(curve.as_array(), axis=1)
    index = int(np.argmax(worst))
    log_to(feedback, f"Operating point {curve.parameters[index]!r} (min exponent {worst[index]:.6f}, "
                     f"weights {None if weights is None else list(weights)})")
    return float(curve.parameters[index])


def output_sequences(num_outputs, length):
    """
    Every output sequence of the given length

    Args:
        num_outputs (int): Output alphabet size
        length (int): Sequence length

    Returns:
        np.ndarray: Array of shape (num_outputs ** length, length)

    Raises:
        CapabilityError: Beyond the enumeration limit
    """
    if num_outputs ** length > ENUMERATION_LIMITS['max_sequences']:
        raise CapabilityError(f"{num_outputs}**{length} output sequences exceed the enumeration limit")
    return np.array(list(itertools.product(range(num_outputs), repeat=length)), dtype=np.int64).reshape(-1, length)


def sequence_probabilities(channel, inputs, sequences):
    """Probability of every output sequence for the given inputs."""
    inputs = np.asarray(inputs, dtype=np.int64)
    return np.prod(channel.rows[inputs[None, :], sequences], axis=1)


def enumerated_estimate_distribution(rule, training, channel, size):
    """Law of the estimate by summing over every training output sequence."""
    sequences = output_sequences(channel.num_outputs, len(training))
    probabilities = sequence_probabilities(channel, training.as_array(), sequences)
    distribution = np.zeros(size)
    for outputs, probability in zip(sequences, probabilities):
        if probability > 0.0:
            distribution[rule.estimate(training, outputs)] += probability
    return distribution


def enumerated_message_errors(codebook, channel):
    """Decoding error probability of every message of an explicit codebook."""
    sequences = output_sequences(channel.num_outputs, codebook.block_length)
    decoded = np.array([codebook.decode(outputs) for outputs in sequences])
    errors = np.zeros(codebook.num_messages)
    for message in range(codebook.num_messages):
        probabilities = sequence_probabilities(channel, codebook.codewords[message], sequences)
        errors[message] = float(probabilities[decoded != message].sum())
    return errors


@dataclass
class OracleResult:
    """Exact single-epoch probabilities and the session quantities assembled from them."""
    channel_index: int
    estimate_m_distribution: np.ndarray
    estimate_c_distribution: np.ndarray
    message_errors: list = field(repr=False)
    p_message_error: float = 0.0
    p_accept_given_accept_sent: float = 0.0
    p_accept_given_reject_sent: float = 0.0
    rho: float = 0.0
    p_error_prop4: float = 0.0
    p_error_session: float = 0.0
    p_error_series: float = 0.0
    expected_epoch_length: float = 0.0
    expected_tau: float = 0.0
    n: int = 1

    @property
    def p_control_error_given_reject(self):
        return self.p_accept_given_reject_sent

    @property
    def expected_tau_over_n(self):
        return self.expected_tau / float(self.n)

    def to_dict(self):
        return {
            'channel': self.channel_index,
            'estimate_m_distribution': self.estimate_m_distribution.tolist(),
            'estimate_c_distribution': self.estimate_c_distribution.tolist(),
            'p_message_error': self.p_message_error,
            'p_accept_given_accept_sent': self.p_accept_given_accept_sent,
            'p_control_error_given_reject': self.p_control_error_given_reject,
            'rho': self.rho,
            'p_error_prop4': self.p_error_prop4,
            'p_error_session': self.p_error_session,
            'p_error_series': self.p_error_series,
            'expected_epoch_length': self.expected_epoch_length,
            'expected_tau': self.expected_tau,
            'expected_tau_over_n': self.expected_tau_over_n,
        }


class EpochOracle:
    def __init__(self, params, codebooks, feedback=None):
        """
        Exact enumeration of one epoch for explicit codebooks at tiny n

        Args:
            params (SchemeParams): The parameters
            codebooks (list): RandomCodebook instances indexed by channel
            feedback (Feedback, optional): Feedback object for reporting logs

        Raises:
            CapabilityError: If an epoch has too many output sequences or a codebook is not explicit
        """
        self.params = params
        self.codebooks = codebooks
        self.feedback = feedback
        family = params.family
        for index, codebook in enumerate(codebooks):
            if not isinstance(codebook, RandomCodebook):
                raise CapabilityError(f"channel {index}: the oracle needs explicit codewords")
        total = params.max_epoch_length()
        if family.num_outputs ** total > ENUMERATION_LIMITS['max_sequences']:
            raise CapabilityError(
                f"An epoch of {total} symbols over {family.num_outputs} outputs exceeds the enumeration limit")
        combos = int(np.prod([c.num_messages for c in codebooks], dtype=object))
        if combos > ENUMERATION_LIMITS['max_compound_messages']:
            raise CapabilityError(f"{combos} compound messages exceed the enumeration limit")

    def log(self, message):
        log_to(self.feedback, message)

    def _estimate_distribution(self, rule, training, channel):
        return enumerated_estimate_distribution(rule, training, channel, len(self.params.family))

    def _message_errors(self, index, channel):
        return enumerated_message_errors(self.codebooks[index], channel)

    def _accept_probability(self, index, channel, accept):
        test = self.params.control_test
        length = self.params.control_lengths[index]
        symbol = test.symbols(index, accept)
        sequences = output_sequences(channel.num_outputs, length)
        probabilities = sequence_probabilities(channel, np.full(length, symbol), sequences)
        accepted = np.array([test.decide(index, outputs) is ControlDecision.ACCEPT for outputs in sequences])
        return float(probabilities[accepted].sum())

    def evaluate(self, channel_index):
        """
        Enumerates every output sequence of every phase

        Args:
            channel_index (int): Realized channel

        Returns:
            OracleResult: Exact epoch and session quantities
        """
        params = self.params
        channel = params.family[channel_index]
        size = len(params.family)
        p_m = self._estimate_distribution(params.rule_m, params.training_m, channel)
        p_c = self._estimate_distribution(params.rule_c, params.training_c, channel)
        message_errors = [self._message_errors(j, channel) if p_m[j] > 0 else np.zeros(self.codebooks[j].num_messages)
                          for j in range(size)]
        accept_a = sum(p_c[c] * self._accept_probability(c, channel, True) for c in range(size) if p_c[c] > 0)
        accept_r = sum(p_c[c] * self._accept_probability(c, channel, False) for c in range(size) if p_c[c] > 0)

        expected_length = (params.training_m_length + float(p_m @ np.array(params.message_lengths))
                           + params.training_c_length + float(p_c @ np.array(params.control_lengths)))

        rhos, joint_errors = [], []
        for message in itertools.product(*[range(c.num_messages) for c in self.codebooks]):
            e = np.array([message_errors[j][w] for j, w in enumerate(message)])
            rhos.append(float(p_m @ ((1.0 - e) * accept_a + e * accept_r)))
            joint_errors.append(float(p_m @ e) * accept_r)
        rhos = np.array(rhos)
        joint_errors = np.array(joint_errors)
        if np.any(rhos <= 0.0):
            raise NumericError("Some compound message is never accepted, sessions do not terminate")

        p_message_error = float(sum(p_m[j] * message_errors[j].mean() for j in range(size)))
        rho = float(rhos.mean())
        result = OracleResult(
            channel_index=channel_index,
            estimate_m_distribution=p_m,
            estimate_c_distribution=p_c,
            message_errors=message_errors,
            p_message_error=p_message_error,
            p_accept_given_accept_sent=float(accept_a),
            p_accept_given_reject_sent=float(accept_r),
            rho=rho,
            p_error_prop4=p_message_error * float(accept_r) / rho,
            p_error_session=float(np.mean(joint_errors / rhos)),
            p_error_series=float(np.mean([session_error_series(r, j) for r, j in zip(rhos, joint_errors)])),
            expected_epoch_length=expected_length,
            expected_tau=expected_length * float(np.mean(1.0 / rhos)),
            n=params.n)
        self.log(f"Oracle channel {channel_index}: rho={result.rho:.12f}, "
                 f"P_error={result.p_error_session:.12e}, E[Lambda n]={expected_length:.6f}")
        return result


def session_error_series(rho, joint_error, tail=None):
    """
    Sums P(error and stop at epoch k) = (1 - rho)^(k-1) * joint_error over k

    Args:
        rho (float): Probability that an epoch accepts
        joint_error (float): Probability that an epoch accepts a wrong message
        tail (float, optional): Stop once the remaining tail is below this bound

    Returns:
        float: Session error probability
    """
    tail = TOLERANCES['series_tail'] if tail is None else tail
    total, term, k = 0.0, joint_error, 0
    while True:
        total += term
        term *= (1.0 - rho)
        k += 1
        # remaining tail is term / rho
        if term <= tail * rho or term == 0.0:
            return total
        if k > 10 ** 7:
            raise NumericError("Session error series does not converge", bracket=(total, total + term / rho))


def brute_force_epoch_oracle(params, codebooks, channel_index, feedback=None):
    """
    Exact epoch probabilities and assembled session quantities

    Args:
        params (SchemeParams): Tiny parameters
        codebooks (list): Explicit codebooks indexed by channel
        channel_index (int): Realized channel

    Returns:
        OracleResult: See EpochOracle.evaluate
    """
    return EpochOracle(params, codebooks, feedback).evaluate(channel_index)


class EpochPredictor:
    def __init__(self, params, codebooks, feedback=None):
        """
        Exact single-epoch quantities for binary output families at any block scale

        The control statistic only depends on how many outputs equal 1, so its
        acceptance probability is a binomial sum. Estimates come from the rule's
        closed form when it has one, surrogate codebooks from their error model.

        Args:
            params (SchemeParams): The parameters
            codebooks (list): Codebooks indexed by channel
            feedback (Feedback, optional): Feedback object for reporting logs

        Raises:
            CapabilityError: If the outputs are not binary, or later when an explicit codebook
                or a rule without closed form needs more sequences than can be enumerated
        """
        if params.family.num_outputs != 2:
            raise CapabilityError("Epoch prediction needs a binary output alphabet")
        self.params = params
        self.codebooks = codebooks
        self.feedback = feedback

    def log(self, message):
        log_to(self.feedback, message)

    def estimate_distribution(self, rule, training, channel):
        exact = rule.estimate_distribution(training, channel)
        if exact is not None:
            return np.asarray(exact, dtype=np.float64)
        return enumerated_estimate_distribution(rule, training, channel, len(self.params.family))

    def message_error(self, index, channel):
        """Decoding error probability averaged over the messages of one codebook."""
        codebook = self.codebooks[index]
        if isinstance(codebook, SurrogateCodebook):
            return codebook.error_probability(channel)
        return float(enumerated_message_errors(codebook, channel).mean())

    def accept_probability(self, index, channel, accept):
        test = self.params.control_test
        length = self.params.control_lengths[index]
        ones = np.arange(length + 1)
        accepted = np.array([
            test.decide(index, np.repeat([0, 1], [length - k, k])) is ControlDecision.ACCEPT for k in ones])
        weights = binom.pmf(ones, length, channel.rows[test.symbols(index, accept), 1])
        return float(weights[accepted].sum())

    def evaluate(self, channel_index):
        """
        Acceptance, error and duration of one epoch, averaged over uniform messages

        Args:
            channel_index (int): Realized channel

        Returns:
            OracleResult: rho, P(error), E[Lambda n] and E[tau] = E[Lambda n] / rho
        """
        params = self.params
        channel = params.family[channel_index]
        size = len(params.family)
        p_m = self.estimate_distribution(params.rule_m, params.training_m, channel)
        p_c = self.estimate_distribution(params.rule_c, params.training_c, channel)
        errors = np.array([self.message_error(j, channel) if p_m[j] > 0 else 0.0 for j in range(size)])
        accept_a = sum(p_c[c] * self.accept_probability(c, channel, True) for c in range(size) if p_c[c] > 0)
        accept_r = sum(p_c[c] * self.accept_probability(c, channel, False) for c in range(size) if p_c[c] > 0)
        rho = float(p_m @ ((1.0 - errors) * accept_a + errors * accept_r))
        if rho <= 0.0:
            raise NumericError("No epoch is ever accepted, sessions do not terminate")
        p_message_error = float(p_m @ errors)
        joint_error = p_message_error * float(accept_r)
        expected_length = (params.training_m_length + float(p_m @ np.array(params.message_lengths))
                           + params.training_c_length + float(p_c @ np.array(params.control_lengths)))
        result = OracleResult(
            channel_index=channel_index,
            estimate_m_distribution=p_m,
            estimate_c_distribution=p_c,
            message_errors=[np.full(c.num_messages, e) for c, e in zip(self.codebooks, errors)],
            p_message_error=p_message_error,
            p_accept_given_accept_sent=float(accept_a),
            p_accept_given_reject_sent=float(accept_r),
            rho=rho,
            p_error_prop4=joint_error / rho,
            p_error_session=joint_error / rho,
            p_error_series=session_error_series(rho, joint_error),
            expected_epoch_length=expected_length,
            expected_tau=expected_length / rho,
            n=params.n)
        self.log(f"Predicted channel {channel_index} at n={params.n}: rho={rho:.6f}, "
                 f"E[Lambda n]={expected_length:.3f}")
        return result
