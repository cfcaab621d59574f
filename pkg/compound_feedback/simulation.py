# -*- coding: utf-8 -*-
"""
Part of the compound_feedback package
Licensed under GPL v2+

Seeded Monte Carlo sweeps over the n schedule and every family member.
Session i of cell (n, l) always draws from the stream (seed, n, l, i), so
the results do not depend on the chunking or the number of worker processes.
"""
import contextlib
import csv
import io
import json
import math
import multiprocessing
from dataclasses import dataclass, field

import numpy as np

from .analysis import eer_lower_bound, trivial_upper_bound
from .detection import ControlDecision, estimation_exponents
from .exceptions import NumericError
from .feedback import log_to
from .scheme import (CodingScheme, build_codebooks, build_manual_params, derive_params,
                     session_statistics)

SIMULATION_COLUMNS = ('n', 'ell', 'sessions', 'P_hat', 'R_hat', 'tau_mean', 'tau_over_n', 'K_mean',
                      'rho_hat', 'emp_exponent', 'lower_bound', 'upper_bound', 'rho_hat_pooled')


def format_number(value):
    """
    Text of a CSV or report number

    Args:
        value (int, float or str): The value

    Returns:
        str: repr of floats, 'inf' for infinities

    Raises:
        NumericError: On NaN
    """
    if isinstance(value, bool) or isinstance(value, str):
        return str(value)
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isnan(value):
        raise NumericError("Refusing to emit NaN")
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return repr(value)


def write_csv(rows, columns, stream):
    """
    Writes dict rows with a header line

    Args:
        rows (list): Dicts keyed by column name
        columns (tuple): Column order
        stream (file): Text stream
    """
    writer = csv.writer(stream, delimiter=',', lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(row[c]) for c in columns])


def csv_text(rows, columns):
    buffer = io.StringIO()
    write_csv(rows, columns, buffer)
    return buffer.getvalue()


def json_safe(value):
    """Replaces infinities by the string 'inf' in nested reports."""
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    if isinstance(value, float):
        if math.isnan(value):
            raise NumericError("Refusing to emit NaN")
        if math.isinf(value):
            return 'inf' if value > 0 else '-inf'
    return value


def chunk_ranges(sessions, chunk_size):
    """Consecutive [start, stop) session index ranges of at most chunk_size sessions."""
    return [(start, min(start + chunk_size, sessions)) for start in range(0, sessions, chunk_size)]


def _run_chunk(task):
    # top level so that worker processes can unpickle it
    params, codebooks, channel_index, seed, start, stop, max_epochs = task
    scheme = CodingScheme(params, codebooks, max_epochs)
    return scheme.run_sessions(channel_index, seed, range(start, stop))


@dataclass
class CellResult:
    """Statistics of one (n, channel) cell next to the exponent bounds of that channel."""
    statistics: object
    lower_bound: float
    upper_bound: float
    transcripts: list = field(default=None, repr=False)

    def row(self):
        s = self.statistics
        return {
            'n': s.n,
            'ell': s.channel_index,
            'sessions': s.sessions,
            'P_hat': s.error_probability,
            'R_hat': s.rate,
            'tau_mean': s.mean_tau,
            'tau_over_n': s.tau_over_n,
            'K_mean': s.mean_epochs,
            'rho_hat': s.rho_first,
            'emp_exponent': s.empirical_exponent,
            'lower_bound': self.lower_bound,
            'upper_bound': self.upper_bound,
            'rho_hat_pooled': s.rho_pooled,
        }


class MonteCarloRunner:
    def __init__(self, config, jobs=1, feedback=None, keep_transcripts=False):
        """
        Runs the sessions of an experiment configuration

        Args:
            config (ExperimentConfig): The experiment
            jobs (int): Worker processes, 1 runs in process
            feedback (Feedback, optional): Feedback object for reporting logs and progress
            keep_transcripts (bool): Keep every transcript in the results
        """
        self.config = config
        self.jobs = max(1, int(jobs))
        self.feedback = feedback
        self.keep_transcripts = keep_transcripts
        self.family = config.build_family()
        self.rates = config.absolute_rates(self.family)
        self.rule_m, self.rule_c = config.rules(self.family)
        self.control_exponents = estimation_exponents(
            self.rule_c, self.rule_c.training_composition()).marginal

    def log(self, message):
        log_to(self.feedback, message)

    def schedule(self):
        """Block scales to simulate: the manual n if lengths are configured, else the n schedule."""
        if self.config.lengths is not None:
            return [self.config.lengths['n']]
        return list(self.config.n_schedule)

    def params_for(self, n):
        """
        Scheme parameters at block scale n

        Args:
            n (int): Block scale

        Returns:
            SchemeParams: Manual lengths when configured, derived ones otherwise
        """
        config = self.config
        lengths = config.lengths
        if lengths is not None:
            return build_manual_params(
                self.family, self.rule_m, self.rule_c, lengths['n'], lengths['alpha_m'], lengths['alpha_c'],
                lengths['beta_m'], lengths['beta_c'], lengths['message_bits'],
                reference_index=config.reference_index, kappa_max=config.scheme_option('kappa_max'),
                slack_exponent=config.scheme_option('slack_exponent'))
        return derive_params(
            self.family, self.rates, self.control_exponents, self.rule_m, self.rule_c, n,
            reference_index=config.reference_index, kappa_max=config.scheme_option('kappa_max'),
            backoff=config.scheme_option('backoff'), slack_exponent=config.scheme_option('slack_exponent'),
            feedback=self.feedback)

    def codebooks_for(self, params):
        return build_codebooks(params, seed=self.config.seed,
                               max_explicit=self.config.scheme_option('max_explicit_codewords'))

    def bounds(self, params):
        """
        Exponent bounds reported next to the statistics

        Returns:
            tuple: (lower, upper) ExponentPoint
        """
        return (eer_lower_bound(self.family, self.rates, params.control_exponents),
                trivial_upper_bound(self.family, self.rates))

    def run_cell(self, params, codebooks, channel_index, pool=None):
        """
        Runs every session of one cell, chunk by chunk

        Args:
            params (SchemeParams): The parameters
            codebooks (list): Codebooks indexed by channel
            channel_index (int): Realized channel
            pool (multiprocessing.Pool, optional): Worker pool

        Returns:
            list: Transcripts in session order, None if canceled
        """
        config = self.config
        max_epochs = config.scheme_option('max_epochs')
        tasks = [(params, codebooks, channel_index, config.seed, start, stop, max_epochs)
                 for start, stop in chunk_ranges(config.sessions, config.chunk_size)]
        chunks = pool.imap(_run_chunk, tasks) if pool is not None else map(_run_chunk, tasks)
        transcripts = []
        for done, chunk in enumerate(chunks, start=1):
            if self.feedback is not None and self.feedback.isCanceled():
                return None
            transcripts.extend(chunk)
            if self.feedback is not None:
                self.feedback.setProgress(100.0 * done / len(tasks))
        return transcripts

    @contextlib.contextmanager
    def worker_pool(self):
        """Process pool for jobs > 1, None otherwise."""
        if self.jobs == 1:
            yield None
            return
        pool = multiprocessing.Pool(self.jobs)
        try:
            yield pool
        finally:
            pool.terminate()
            pool.join()

    def run(self):
        """
        Runs the whole sweep

        Returns:
            list: CellResult per (n, channel) in schedule then channel order;
                stops early with the completed cells when canceled
        """
        results = []
        with self.worker_pool() as pool:
            for n in self.schedule():
                params = self.params_for(n)
                codebooks = self.codebooks_for(params)
                lower, upper = self.bounds(params)
                for channel_index in range(len(self.family)):
                    self.log(f"Simulating n={params.n}, channel {channel_index}: {self.config.sessions} sessions")
                    transcripts = self.run_cell(params, codebooks, channel_index, pool)
                    if transcripts is None:
                        self.log("Canceled, returning the completed cells")
                        return results
                    statistics = session_statistics(transcripts)
                    results.append(CellResult(statistics, lower[channel_index], upper[channel_index],
                                              transcripts if self.keep_transcripts else None))
                    self.log(f"n={params.n}, channel {channel_index}: P_hat={statistics.error_probability!r}, "
                             f"tau/n={statistics.tau_over_n:.4f}, K_mean={statistics.mean_epochs:.4f}")
        return results


def simulation_rows(results):
    return [r.row() for r in results]


def write_transcripts(results, stream):
    """
    Dumps every kept transcript as one JSON object per line

    Args:
        results (list): CellResult objects run with keep_transcripts
        stream (file): Text stream
    """
    for result in results:
        for transcript in result.transcripts or []:
            stream.write(json.dumps(transcript.to_dict(), sort_keys=True))
            stream.write('\n')


def z_score(estimate, reference, standard_error):
    """
    Standardized deviation of an estimate from its exact value

    A zero standard error gives 0 for an exact match and an infinite score otherwise.
    """
    difference = float(estimate) - float(reference)
    if standard_error > 0.0:
        return difference / standard_error
    if abs(difference) <= 1e-12:
        return 0.0
    return math.copysign(math.inf, difference)


def _proportion_entry(hits, count, reference):
    estimate = hits / float(count)
    error = math.sqrt(max(reference * (1.0 - reference), 0.0) / count)
    return {'oracle': reference, 'monte_carlo': estimate, 'standard_error': error,
            'z': z_score(estimate, reference, error)}


def _mean_entry(samples, reference, reference_variance):
    samples = np.asarray(samples, dtype=np.float64)
    variance = float(samples.var(ddof=1)) if samples.size > 1 else 0.0
    error = math.sqrt(max(variance, reference_variance) / samples.size)
    estimate = float(samples.mean())
    return {'oracle': reference, 'monte_carlo': estimate, 'standard_error': error,
            'z': z_score(estimate, reference, error)}


def epoch_length_variance(params, oracle):
    """Exact variance of the epoch length; the two training estimates are independent."""
    message = np.array(params.message_lengths, dtype=np.float64)
    control = np.array(params.control_lengths, dtype=np.float64)
    p_m, p_c = oracle.estimate_m_distribution, oracle.estimate_c_distribution
    return float(p_m @ message ** 2 - (p_m @ message) ** 2 + p_c @ control ** 2 - (p_c @ control) ** 2)


def oracle_comparison(params, oracle, transcripts):
    """
    Compares exact epoch and session quantities with Monte Carlo transcripts

    Proportions use the binomial standard error at the exact value; means use
    the larger of the sample variance and an exact reference variance.

    Args:
        params (SchemeParams): The parameters
        oracle (OracleResult): Exact values for the realized channel
        transcripts (list): SessionTranscript objects of the same channel

    Returns:
        dict: Per quantity the oracle value, estimate, standard error and z-score
    """
    count = len(transcripts)
    first = [t.epochs[0] for t in transcripts]
    length_variance = epoch_length_variance(params, oracle)
    return {
        'rho': _proportion_entry(
            sum(1 for e in first if e.control_decided is ControlDecision.ACCEPT), count, oracle.rho),
        'p_error_session': _proportion_entry(
            sum(1 for t in transcripts if t.error), count, oracle.p_error_session),
        'p_message_error': _proportion_entry(
            sum(1 for e in first if e.decoded != e.message), count, oracle.p_message_error),
        'expected_epoch_length': _mean_entry(
            [e.length for e in first], oracle.expected_epoch_length, length_variance),
        'expected_tau': _mean_entry(
            [t.tau for t in transcripts], oracle.expected_tau, length_variance * oracle.expected_tau
            / max(oracle.expected_epoch_length, 1.0)),
    }
