# -*- coding: utf-8 -*-
"""
Part of the compound_feedback package
Licensed under GPL v2+

The four-phase variable-rate variable-length scheme: parameter derivation,
epochs, sessions and their statistics.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import chisquare

from .channel_core import sample_block, session_rng
from .codebook import build_codebook_from_bits
from .definitions import MONTE_CARLO_DEFAULTS, SCHEME_DEFAULTS
from .detection import ControlDecision, ControlTest, estimation_exponents
from .exceptions import ArgumentError, DegenerateChannelError, InfeasibleRateError, RunawayError
from .feedback import log_to
from .infotheory import capacity_vector


@dataclass
class SchemeParams:
    """Constants and integer phase lengths of the scheme at block scale n."""
    family: object = field(repr=False)
    n: int
    rates: np.ndarray
    reference_index: int
    capacities: np.ndarray
    burnashev: np.ndarray
    control_exponents: np.ndarray
    kappa: np.ndarray
    gamma: np.ndarray
    zeta: np.ndarray
    xi: np.ndarray
    training_m_length: int
    training_c_length: int
    message_lengths: tuple
    control_lengths: tuple
    message_bits: tuple
    rule_m: object = field(repr=False)
    rule_c: object = field(repr=False)
    control_test: ControlTest = field(repr=False)
    training_m: object = field(repr=False)
    training_c: object = field(repr=False)

    @property
    def num_channels(self):
        return len(self.family)

    @property
    def alpha_m(self):
        return self.training_m_length / float(self.n)

    @property
    def alpha_c(self):
        return self.training_c_length / float(self.n)

    @property
    def beta_m(self):
        return np.array(self.message_lengths) / float(self.n)

    @property
    def beta_c(self):
        return np.array(self.control_lengths) / float(self.n)

    @property
    def message_sizes(self):
        return tuple(1 << b for b in self.message_bits)

    @property
    def codebook_rates(self):
        return np.array(self.message_bits) / np.array(self.message_lengths, dtype=np.float64)

    def epoch_length(self, estimate_m, estimate_c):
        """
        Channel uses of one epoch, Lambda * n

        Args:
            estimate_m (int): Channel estimate of the message training phase
            estimate_c (int): Channel estimate of the control training phase

        Returns:
            int: alpha_m n + beta_m n + alpha_c n + beta_c n
        """
        return (self.training_m_length + self.message_lengths[estimate_m]
                + self.training_c_length + self.control_lengths[estimate_c])

    def max_epoch_length(self):
        return (self.training_m_length + max(self.message_lengths)
                + self.training_c_length + max(self.control_lengths))

    def to_dict(self):
        return {
            'n': self.n,
            'rates': self.rates.tolist(),
            'reference_index': self.reference_index,
            'capacities': self.capacities.tolist(),
            'burnashev': [_finite_or_inf(b) for b in self.burnashev],
            'control_exponents': [_finite_or_inf(t) for t in self.control_exponents],
            'kappa': self.kappa.tolist(),
            'gamma': self.gamma.tolist(),
            'zeta': self.zeta.tolist(),
            'xi': self.xi.tolist(),
            'alpha_m_n': self.training_m_length,
            'alpha_c_n': self.training_c_length,
            'beta_m_n': list(self.message_lengths),
            'beta_c_n': list(self.control_lengths),
            'message_bits': list(self.message_bits),
            'rule_m': self.rule_m.to_dict(),
            'rule_c': self.rule_c.to_dict(),
        }


def _finite_or_inf(value):
    return float(value) if np.isfinite(value) else 'inf'


def scheme_constants(capacities, rates, control_exponents, burnashev, reference_index, kappa_max=None):
    """
    kappa = T_c / B, gamma = R / C, zeta = (1 - gamma) / (1 + kappa), xi = zeta_* / zeta

    Args:
        capacities (array_like): C_l
        rates (array_like): R_l
        control_exponents (array_like): T_{c,l}
        burnashev (array_like): B_l
        reference_index (int): l*
        kappa_max (float, optional): Replaces kappa where B is infinite or T_c / B is not finite

    Returns:
        tuple: (kappa, gamma, zeta, xi) arrays
    """
    kappa_max = SCHEME_DEFAULTS['kappa_max'] if kappa_max is None else kappa_max
    capacities = np.asarray(capacities, dtype=np.float64)
    burnashev = np.asarray(burnashev, dtype=np.float64)
    with np.errstate(divide='ignore', invalid='ignore'):
        kappa = np.asarray(control_exponents, dtype=np.float64) / burnashev
        gamma = np.where(capacities > 0, np.asarray(rates, dtype=np.float64) / capacities, 0.0)
    # zero-error control channels keep a finite control phase
    kappa = np.where(np.isinf(burnashev) | ~np.isfinite(kappa), kappa_max, kappa)
    zeta = (1.0 - gamma) / (1.0 + kappa)
    xi = zeta[reference_index] / zeta
    return kappa, gamma, zeta, xi


def _check_family_inputs(family, rates, reference_index):
    rates = np.asarray(rates, dtype=np.float64)
    if rates.shape != (len(family),):
        raise ArgumentError(f"Expected {len(family)} rates, got {rates.size}")
    if np.any(rates < 0) or not np.all(np.isfinite(rates)):
        raise ArgumentError("Rates must be finite and non-negative")
    if not (0 <= reference_index < len(family)):
        raise ArgumentError(f"Reference index {reference_index} out of range")
    return rates


def _check_burnashev(control_test):
    burnashev = np.array(control_test.divergences)
    for index, value in enumerate(burnashev):
        if value <= 0.0:
            raise DegenerateChannelError(f"channel {index}: Burnashev constant is zero, no control test possible")
    return burnashev


def derive_params(family, rates, control_exponents, rule_m, rule_c, n, reference_index=0,
                  kappa_max=None, backoff=None, slack_exponent=None, feedback=None):
    """
    Derives the scheme constants and phase lengths at block scale n

    Args:
        family (CompoundFamily): The family
        rates (array_like): Target rates R_l, 0 <= R_l < C_l
        control_exponents (array_like): T_{c,l} of the control training rule, positive
        rule_m (EstimationRule): Rule of the message training phase
        rule_c (EstimationRule): Rule of the control training phase
        n (int): Block scale, at least 2
        reference_index (int): Reference channel l*
        kappa_max (float, optional): kappa surrogate where B is infinite or T_c / B is not finite
        backoff (float, optional): Message phase lengthening factor, times n ** -1/4
        slack_exponent (float, optional): Control test slack exponent
        feedback (Feedback, optional): Feedback object for reporting logs

    Returns:
        SchemeParams: The parameters

    Raises:
        InfeasibleRateError: If some R_l >= C_l
        DegenerateChannelError: If some B_l = 0
    """
    n = int(n)
    if n < 2:
        raise ArgumentError("Block scale n must be at least 2")
    rates = _check_family_inputs(family, rates, reference_index)
    backoff = SCHEME_DEFAULTS['backoff'] if backoff is None else float(backoff)
    if backoff < 0:
        raise ArgumentError("Backoff must be non-negative")
    control_test = ControlTest.from_family(family, slack_exponent)
    burnashev = _check_burnashev(control_test)
    capacities = capacity_vector(family)
    for index, (rate, cap) in enumerate(zip(rates, capacities)):
        if rate >= cap:
            raise InfeasibleRateError(f"channel {index}: rate {rate:.6f} not below capacity {cap:.6f}")
    control_exponents = np.asarray(control_exponents, dtype=np.float64)
    if control_exponents.shape != (len(family),) or np.any(control_exponents <= 0):
        raise ArgumentError("Control rule exponents must be positive, one per channel")
    kappa, gamma, zeta, xi = scheme_constants(capacities, rates, control_exponents, burnashev,
                                              reference_index, kappa_max)
    zeta_star = zeta[reference_index]

    training_m_length = max(1, int(math.floor(n / math.log2(n))))
    training_c_length = max(1, int(math.ceil(n * zeta_star)))
    message_bits, message_lengths, control_lengths = [], [], []
    stretch = 1.0 + backoff * n ** -0.25
    for index in range(len(family)):
        bits = int(round(n * xi[index] * rates[index]))
        length = max(1, int(math.ceil(n * xi[index] * gamma[index] * stretch)))
        while bits > 0 and bits / float(length) >= capacities[index]:
            length += 1
        message_bits.append(bits)
        message_lengths.append(length)
        control_lengths.append(max(1, int(math.ceil(n * kappa[index] * zeta_star))))

    params = SchemeParams(
        family=family, n=n, rates=rates, reference_index=reference_index, capacities=capacities,
        burnashev=burnashev, control_exponents=control_exponents, kappa=kappa, gamma=gamma,
        zeta=zeta, xi=xi, training_m_length=training_m_length, training_c_length=training_c_length,
        message_lengths=tuple(message_lengths), control_lengths=tuple(control_lengths),
        message_bits=tuple(message_bits), rule_m=rule_m, rule_c=rule_c, control_test=control_test,
        training_m=rule_m.default_training(training_m_length),
        training_c=rule_c.default_training(training_c_length))
    log_to(feedback, f"n={n}: alpha_m n={training_m_length}, alpha_c n={training_c_length}, "
                     f"beta_m n={message_lengths}, beta_c n={control_lengths}, bits={message_bits}")
    return params


def build_manual_params(family, rule_m, rule_c, n, training_m_length, training_c_length,
                        message_lengths, control_lengths, message_bits, reference_index=0,
                        kappa_max=None, slack_exponent=None):
    """
    Parameters with hand-picked integer phase lengths, for exact enumeration

    The constants are reported for the nominal rates message_bits / n.

    Args:
        family (CompoundFamily): The family
        rule_m (EstimationRule): Rule of the message training phase
        rule_c (EstimationRule): Rule of the control training phase
        n (int): Block scale
        training_m_length (int): alpha_m n
        training_c_length (int): alpha_c n
        message_lengths (list): beta_{m,l} n
        control_lengths (list): beta_{c,l} n
        message_bits (list): log2 M_l
        reference_index (int): Reference channel l*

    Returns:
        SchemeParams: The parameters
    """
    size = len(family)
    lengths = [training_m_length, training_c_length] + list(message_lengths) + list(control_lengths)
    if len(message_lengths) != size or len(control_lengths) != size or len(message_bits) != size:
        raise ArgumentError(f"Expected {size} per-channel lengths and message sizes")
    if any(int(v) < 1 for v in lengths):
        raise ArgumentError("Phase lengths must be positive integers")
    control_test = ControlTest.from_family(family, slack_exponent)
    burnashev = _check_burnashev(control_test)
    rates = np.array(message_bits, dtype=np.float64) / float(n)
    capacities = capacity_vector(family)
    for index in range(size):
        if message_bits[index] > 0 and message_bits[index] / float(message_lengths[index]) >= capacities[index]:
            raise InfeasibleRateError(f"channel {index}: codebook rate not below capacity")
    training_c = rule_c.default_training(training_c_length)
    control_exponents = estimation_exponents(rule_c, training_c.composition(family.num_inputs)).marginal
    kappa, gamma, zeta, xi = scheme_constants(capacities, rates, control_exponents, burnashev,
                                              reference_index, kappa_max)
    return SchemeParams(
        family=family, n=int(n), rates=rates, reference_index=reference_index, capacities=capacities,
        burnashev=burnashev, control_exponents=control_exponents, kappa=kappa, gamma=gamma,
        zeta=zeta, xi=xi, training_m_length=int(training_m_length), training_c_length=int(training_c_length),
        message_lengths=tuple(int(v) for v in message_lengths),
        control_lengths=tuple(int(v) for v in control_lengths),
        message_bits=tuple(int(v) for v in message_bits), rule_m=rule_m, rule_c=rule_c,
        control_test=control_test, training_m=rule_m.default_training(training_m_length),
        training_c=training_c)


def build_codebooks(params, seed=None, rng=None, max_explicit=None):
    """
    One codebook per channel, drawn from the codebook stream of (seed, n)

    Args:
        params (SchemeParams): The parameters
        seed (int, optional): Experiment seed
        rng (np.random.Generator, optional): Stream used instead of the seed

    Returns:
        list: Codebooks indexed by channel
    """
    if rng is None:
        seed = MONTE_CARLO_DEFAULTS['seed'] if seed is None else seed
        rng = session_rng(seed, params.n, MONTE_CARLO_DEFAULTS['codebook_stream'])
    return [build_codebook_from_bits(channel, params.message_bits[index], params.message_lengths[index],
                                     rng, max_explicit)
            for index, channel in enumerate(params.family)]


@dataclass
class EpochRecord:
    estimate_m: int
    message: int
    decoded: int
    estimate_c: int
    control_sent: ControlDecision
    control_decided: ControlDecision
    length: int

    def to_dict(self):
        return {
            'estimate_m': self.estimate_m,
            'message': self.message,
            'decoded': self.decoded,
            'estimate_c': self.estimate_c,
            'control_sent': self.control_sent.value,
            'control_decided': self.control_decided.value,
            'length': self.length,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(int(data['estimate_m']), int(data['message']), int(data['decoded']),
                   int(data['estimate_c']), ControlDecision(data['control_sent']),
                   ControlDecision(data['control_decided']), int(data['length']))


@dataclass
class SessionTranscript:
    """Every epoch of one session and the final decision."""
    channel_index: int
    n: int
    messages: tuple
    epochs: list
    final_estimate: int
    final_message: int
    final_bits: int
    session_index: int = 0

    @property
    def stopping_epoch(self):
        return len(self.epochs)

    @property
    def tau(self):
        return sum(e.length for e in self.epochs)

    @property
    def error(self):
        return self.final_message != self.messages[self.final_estimate]

    def to_dict(self):
        return {
            'session': self.session_index,
            'n': self.n,
            'channel': self.channel_index,
            'messages': list(self.messages),
            'K': self.stopping_epoch,
            'tau': self.tau,
            'final_estimate': self.final_estimate,
            'final_message': self.final_message,
            'final_bits': self.final_bits,
            'error': self.error,
            'epochs': [e.to_dict() for e in self.epochs],
        }

    @classmethod
    def from_dict(cls, data):
        return cls(channel_index=int(data['channel']), n=int(data['n']),
                   messages=tuple(int(m) for m in data['messages']),
                   epochs=[EpochRecord.from_dict(e) for e in data['epochs']],
                   final_estimate=int(data['final_estimate']), final_message=int(data['final_message']),
                   final_bits=int(data['final_bits']), session_index=int(data.get('session', 0)))


def draw_compound_message(params, codebooks, rng):
    """Independent uniform component messages, one per codebook."""
    return tuple(codebook.draw_message(rng) for codebook in codebooks)


def run_epoch(params, channel_index, message, codebooks, rng, force_message_error=False):
    """
    Runs the four phases of one epoch

    Args:
        params (SchemeParams): The parameters
        channel_index (int): Realized channel
        message (tuple): Compound message, one component per channel
        codebooks (list): Codebooks indexed by channel
        rng (np.random.Generator): Session random stream
        force_message_error (bool): Treat the message phase as failed (test hook)

    Returns:
        EpochRecord: Outcome of the epoch
    """
    channel = params.family[channel_index]
    outputs = sample_block(channel, params.training_m.as_array(), rng)
    estimate_m = params.rule_m.estimate(params.training_m, outputs)

    sent = message[estimate_m]
    decoded = codebooks[estimate_m].transmit(sent, channel, rng)
    success = decoded == sent and not force_message_error

    outputs = sample_block(channel, params.training_c.as_array(), rng)
    estimate_c = params.rule_c.estimate(params.training_c, outputs)

    test = params.control_test
    symbol = test.symbols(estimate_c, accept=success)
    outputs = sample_block(channel, np.full(params.control_lengths[estimate_c], symbol), rng)
    decided = test.decide(estimate_c, outputs)

    return EpochRecord(
        estimate_m=estimate_m, message=sent, decoded=decoded, estimate_c=estimate_c,
        control_sent=ControlDecision.ACCEPT if success else ControlDecision.REJECT,
        control_decided=decided, length=params.epoch_length(estimate_m, estimate_c))


def run_session(params, channel_index, rng, codebooks, max_epochs=None, session_index=0):
    """
    Repeats epochs with the same compound message until the control phase accepts

    Args:
        params (SchemeParams): The parameters
        channel_index (int): Realized channel
        rng (np.random.Generator): Session random stream
        codebooks (list): Codebooks indexed by channel
        max_epochs (int, optional): Epoch cap
        session_index (int): Index recorded in the transcript

    Returns:
        SessionTranscript: The transcript

    Raises:
        RunawayError: If no epoch accepts within the cap
    """
    max_epochs = max_epochs or SCHEME_DEFAULTS['max_epochs']
    message = draw_compound_message(params, codebooks, rng)
    epochs = []
    while len(epochs) < max_epochs:
        record = run_epoch(params, channel_index, message, codebooks, rng)
        epochs.append(record)
        if record.control_decided is ControlDecision.ACCEPT:
            return SessionTranscript(
                channel_index=channel_index, n=params.n, messages=message, epochs=epochs,
                final_estimate=record.estimate_m, final_message=record.decoded,
                final_bits=params.message_bits[record.estimate_m], session_index=session_index)
    raise RunawayError(f"n={params.n}, channel {channel_index}, session {session_index}: "
                       f"no ACCEPT within {max_epochs} epochs")


class CodingScheme:
    def __init__(self, params, codebooks, max_epochs=None, feedback=None):
        """
        Bundles the parameters and codebooks of one block scale

        Args:
            params (SchemeParams): The parameters
            codebooks (list): Codebooks indexed by channel
            max_epochs (int, optional): Epoch cap of every session
            feedback (Feedback, optional): Feedback object for reporting logs
        """
        self.params = params
        self.codebooks = codebooks
        self.max_epochs = max_epochs or SCHEME_DEFAULTS['max_epochs']
        self.feedback = feedback

    def log(self, message):
        log_to(self.feedback, message)

    def run_epoch(self, channel_index, message, rng, force_message_error=False):
        return run_epoch(self.params, channel_index, message, self.codebooks, rng, force_message_error)

    def run_session(self, channel_index, rng, session_index=0):
        return run_session(self.params, channel_index, rng, self.codebooks, self.max_epochs, session_index)

    def run_sessions(self, channel_index, seed, session_indices):
        """
        Runs sessions on their own random streams

        Args:
            channel_index (int): Realized channel
            seed (int): Experiment seed
            session_indices (iterable): Sessions to run

        Returns:
            list: Transcripts in the order of session_indices
        """
        return [self.run_session(channel_index, session_rng(seed, self.params.n, channel_index, i), i)
                for i in session_indices]


@dataclass
class SessionStatistics:
    n: int
    channel_index: int
    sessions: int
    error_probability: float
    rate: float
    mean_tau: float
    mean_epochs: float
    rho_first: float
    rho_pooled: float

    @property
    def tau_over_n(self):
        return self.mean_tau / float(self.n)

    @property
    def empirical_exponent(self):
        if self.error_probability <= 0.0:
            return np.inf
        return -math.log2(self.error_probability) / self.mean_tau


def session_statistics(transcripts):
    """
    Plug-in estimates over the transcripts of one (n, channel) cell

    Args:
        transcripts (list): SessionTranscript objects, same n and channel

    Returns:
        SessionStatistics: Error probability, rate E[log2 M]/E[tau], mean tau,
            mean K, first-epoch and pooled acceptance frequencies
    """
    if not transcripts:
        raise ArgumentError("No transcripts to summarize")
    cells = {(t.n, t.channel_index) for t in transcripts}
    if len(cells) != 1:
        raise ArgumentError(f"Transcripts mix several (n, channel) cells: {sorted(cells)}")
    count = len(transcripts)
    errors = sum(1 for t in transcripts if t.error)
    taus = np.array([t.tau for t in transcripts], dtype=np.float64)
    epochs = np.array([t.stopping_epoch for t in transcripts], dtype=np.float64)
    bits = np.array([t.final_bits for t in transcripts], dtype=np.float64)
    first_accepts = sum(1 for t in transcripts if t.epochs[0].control_decided is ControlDecision.ACCEPT)
    n, channel_index = cells.pop()
    return SessionStatistics(
        n=n, channel_index=channel_index, sessions=count,
        error_probability=errors / float(count),
        rate=float(bits.mean() / taus.mean()),
        mean_tau=float(taus.mean()),
        mean_epochs=float(epochs.mean()),
        rho_first=first_accepts / float(count),
        rho_pooled=count / float(epochs.sum()))


@dataclass
class GeometricFit:
    rho: float
    statistic: float
    p_value: float
    bins: int


def stopping_time_fit(transcripts):
    """
    Chi-square goodness of fit of the stopping epochs against Geometric(rho)

    rho is fitted by maximum likelihood; bins are merged until every expected
    count is at least 5 and the fitted parameter costs one degree of freedom.

    Args:
        transcripts (list): SessionTranscript objects

    Returns:
        GeometricFit: Fitted rho, statistic and p-value
    """
    stops = np.array([t.stopping_epoch for t in transcripts], dtype=np.int64)
    count = stops.size
    if count == 0:
        raise ArgumentError("No transcripts to fit")
    rho = count / float(stops.sum())
    if rho >= 1.0:
        return GeometricFit(rho=1.0, statistic=0.0, p_value=1.0, bins=1)
    edges = []
    k = 1
    # P(K = k) = rho (1 - rho)^(k - 1); the last bin collects the tail
    while count * (1.0 - rho) ** k >= 5.0 and count * rho * (1.0 - rho) ** (k - 1) >= 5.0:
        edges.append(k)
        k += 1
    expected = [count * rho * (1.0 - rho) ** (j - 1) for j in edges]
    expected.append(count * (1.0 - rho) ** len(edges))
    observed = [int(np.count_nonzero(stops == j)) for j in edges]
    observed.append(int(np.count_nonzero(stops > len(edges))))
    if len(observed) < 3:
        return GeometricFit(rho=rho, statistic=0.0, p_value=1.0, bins=len(observed))
    statistic, p_value = chisquare(observed, expected, ddof=1)
    return GeometricFit(rho=rho, statistic=float(statistic), p_value=float(p_value), bins=len(observed))
