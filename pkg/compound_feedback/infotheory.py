# -*- coding: utf-8 -*-
"""
Part of the compound_feedback package
Licensed under GPL v2+

Information measures in bits: divergences, mutual information, capacities
and the Burnashev constant of the control phase.
"""
import functools
import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import entr, rel_entr

from .channel_core import Dmc
from .definitions import GRID_DEFAULTS, ITERATION_CAPS, LOG2E, TOLERANCES
from .exceptions import ArgumentError, NumericError
from .feedback import log_to


def as_distribution(p, size=None, name='distribution'):
    """
    Validates a probability vector

    Args:
        p (array_like): Candidate distribution
        size (int, optional): Required length
        name (str): Name used in error messages

    Returns:
        np.ndarray: The distribution as float64 array
    """
    vector = np.asarray(p, dtype=np.float64)
    if vector.ndim != 1 or vector.size == 0:
        raise ArgumentError(f"{name} must be a non-empty vector")
    if size is not None and vector.size != size:
        raise ArgumentError(f"{name} has {vector.size} entries, expected {size}")
    if np.any(vector < 0.0) or not np.all(np.isfinite(vector)):
        raise ArgumentError(f"{name} has negative or non finite entries")
    if abs(vector.sum() - 1.0) > TOLERANCES['row_sum']:
        raise ArgumentError(f"{name} sums to {vector.sum()!r}, expected 1")
    return vector


def kl_divergence(p, q):
    """
    Relative entropy D(p||q) in bits

    Args:
        p (array_like): First distribution
        q (array_like): Second distribution on the same alphabet

    Returns:
        float: Divergence, +inf if p is not absolutely continuous w.r.t. q
    """
    p = as_distribution(p, name='p')
    q = as_distribution(q, size=p.size, name='q')
    return float(np.sum(rel_entr(p, q)) * LOG2E)


def entropy(p):
    """Shannon entropy in bits."""
    p = as_distribution(p)
    return float(np.sum(entr(p)) * LOG2E)


def binary_entropy(p):
    return entropy([1.0 - p, p])


def binary_kl(a, b):
    """
    Binary divergence D(a||b) between Bernoulli(a) and Bernoulli(b)

    Args:
        a (float): Probability of a one under the first law
        b (float): Probability of a one under the second law

    Returns:
        float: Divergence in bits
    """
    return kl_divergence([1.0 - a, a], [1.0 - b, b])


def _row_divergences(rows, q):
    # D(Q(.|x) || q) for every input x, in bits
    with np.errstate(divide='ignore'):
        return np.sum(rel_entr(rows, q[None, :]), axis=1) * LOG2E


def mutual_information(input_distribution, channel):
    """
    Mutual information I(P, Q) in bits

    Args:
        input_distribution (array_like): P over the input alphabet
        channel (Dmc): The channel Q

    Returns:
        float: I(X;Y) with X ~ P
    """
    p = as_distribution(input_distribution, size=channel.num_inputs, name='input distribution')
    q = p @ channel.rows
    used = p > 0
    return float(p[used] @ _row_divergences(channel.rows[used], q))


def _mutual_information_batch(inputs, rows):
    # I(P, Q) for every row P of inputs, via H(PQ) - sum_x P(x) H(Q(.|x))
    outputs = inputs @ rows
    output_entropy = np.sum(entr(outputs), axis=1)
    row_entropy = np.sum(entr(rows), axis=1)
    return (output_entropy - inputs @ row_entropy) * LOG2E


def first_maximizer(scores, tol=None):
    """
    Index of the first score within tol of the maximum

    Args:
        scores (array_like): Log-likelihood scores, -inf allowed
        tol (float, optional): Scores this close to the maximum count as tied

    Returns:
        int: Smallest tied index
    """
    tol = TOLERANCES['tie'] if tol is None else tol
    scores = np.asarray(scores, dtype=np.float64)
    best = scores.max()
    if np.isneginf(best):
        return 0
    return int(np.flatnonzero(scores >= best - tol)[0])


def simplex_grid(dimension, resolution):
    """
    All points of the probability simplex with coordinates in multiples of 1/resolution

    Args:
        dimension (int): Number of coordinates
        resolution (int): Grid denominator

    Returns:
        np.ndarray: Array of shape (count, dimension)
    """
    if dimension == 1:
        return np.ones((1, 1))
    bars = np.array(list(itertools.combinations(range(resolution + dimension - 1), dimension - 1)))
    edges = np.hstack([np.full((bars.shape[0], 1), -1), bars,
                       np.full((bars.shape[0], 1), resolution + dimension - 1)])
    counts = np.diff(edges, axis=1) - 1
    return counts / float(resolution)


def simplex_grid_size(dimension, resolution):
    from scipy.special import comb
    return int(comb(resolution + dimension - 1, dimension - 1, exact=True))


class BlahutArimoto:
    def __init__(self, channel, tol=None, max_iterations=None, initial_input=None, feedback=None):
        """
        Initializes the alternating maximization of I(P, Q) over P

        Args:
            channel (Dmc): The channel
            tol (float, optional): Stop when upper bound - lower bound <= tol
            max_iterations (int, optional): Iteration cap
            initial_input (array_like, optional): Warm start, strictly positive
            feedback (Feedback, optional): Feedback object for reporting logs
        """
        self.channel = channel
        self.tol = TOLERANCES['capacity'] if tol is None else tol
        self.max_iterations = max_iterations or ITERATION_CAPS['blahut_arimoto']
        if initial_input is None:
            self.input = np.full(channel.num_inputs, 1.0 / channel.num_inputs)
        else:
            self.input = as_distribution(initial_input, size=channel.num_inputs).copy()
        self.feedback = feedback
        self.lower_history = []
        self.lower = 0.0
        self.upper = np.inf

    def log(self, message):
        log_to(self.feedback, message)

    def solve(self):
        """
        Runs the iteration

        Returns:
            tuple: (lower bound on capacity, input achieving it)

        Raises:
            NumericError: If the gap is not closed within the iteration cap
        """
        rows = self.channel.rows
        p = self.input
        for iteration in range(self.max_iterations):
            q = p @ rows
            c = _row_divergences(rows, q)
            self.lower = float(p @ c)
            self.upper = float(np.max(c))
            self.lower_history.append(self.lower)
            if self.upper - self.lower <= self.tol:
                self.input = p
                return self.lower, p
            p = p * np.exp2(c - self.upper)
            p = p / p.sum()
        self.input = p
        raise NumericError(
            f"Blahut-Arimoto did not converge in {self.max_iterations} iterations "
            f"(gap {self.upper - self.lower:.3e})", bracket=(self.lower, self.upper))


@functools.lru_cache(maxsize=512)
def _cached_capacity(channel, tol, max_iterations):
    value, p = BlahutArimoto(channel, tol, max_iterations).solve()
    p = p.copy()
    p.setflags(write=False)
    return value, p


def capacity(channel, tol=None, max_iterations=None):
    """
    Channel capacity by Blahut-Arimoto

    Args:
        channel (Dmc): The channel
        tol (float, optional): Gap between the upper and lower bound at termination
        max_iterations (int, optional): Iteration cap

    Returns:
        tuple: (capacity in bits, capacity-achieving input distribution)
    """
    tol = TOLERANCES['capacity'] if tol is None else float(tol)
    if tol <= 0:
        raise ArgumentError("Tolerance must be positive")
    return _cached_capacity(channel, tol, max_iterations or ITERATION_CAPS['blahut_arimoto'])


@dataclass(frozen=True)
class BurnashevResult:
    """Largest divergence between two output laws and the symbols achieving it."""
    value: float
    accept_symbol: int
    reject_symbol: int


def burnashev_b(channel):
    """
    Burnashev constant max over (a, r) of D(Q(.|a) || Q(.|r))

    Ties are broken by the lexicographically smallest (a, r).

    Args:
        channel (Dmc): The channel

    Returns:
        BurnashevResult: Value (possibly +inf) and control symbols
    """
    best = BurnashevResult(0.0, 0, 0)
    for a in range(channel.num_inputs):
        for r in range(channel.num_inputs):
            if a == r:
                continue
            value = kl_divergence(channel.rows[a], channel.rows[r])
            if best.accept_symbol == best.reject_symbol or value > best.value:
                best = BurnashevResult(value, a, r)
    return best


def capacity_vector(family, tol=None):
    """Capacities (C_0, ..., C_{L-1}) of the family members."""
    return np.array([capacity(channel, tol)[0] for channel in family])


def compound_capacity_feedback(family, tol=None):
    """
    Compound capacity with feedback, min over the family of the capacities

    Args:
        family (CompoundFamily): The family
        tol (float, optional): Capacity tolerance

    Returns:
        float: min_l C_l in bits
    """
    return float(np.min(capacity_vector(family, tol)))


def stacked_channel(family, weights):
    """
    Channel x -> (l, y) with weight w_l Q_l(y|x)

    Its mutual information equals sum_l w_l I(P, Q_l).

    Args:
        family (CompoundFamily): The family
        weights (array_like): Mixture weights over the family

    Returns:
        Dmc: Channel with L * |Y| outputs
    """
    weights = as_distribution(weights, size=len(family), name='weights')
    weights = weights / weights.sum()
    rows = np.hstack([w * channel.rows for w, channel in zip(weights, family)])
    rows = rows / rows.sum(axis=1, keepdims=True)
    return Dmc(rows)


class CompoundCapacitySolver:
    def __init__(self, family, tol=None, max_iterations=None, feedback=None):
        """
        Initializes the max-min search of min_l I(P, Q_l) over P

        Upper bounds come from the stacked channel of a weight vector, lower
        bounds from evaluating min_l I(P, Q_l) at candidate inputs.

        Args:
            family (CompoundFamily): The family
            tol (float, optional): Required bracket width
            max_iterations (int, optional): Cap on the weight updates
            feedback (Feedback, optional): Feedback object for reporting logs
        """
        self.family = family
        self.tol = TOLERANCES['compound_capacity'] if tol is None else tol
        self.max_iterations = max_iterations or ITERATION_CAPS['compound_outer']
        self.feedback = feedback
        self.rows = np.stack([c.rows for c in family])
        self.lower = -np.inf
        self.upper = np.inf
        self.best_input = None
        self.best_weights = None

    def log(self, message):
        log_to(self.feedback, message)

    def _offer_input(self, p):
        p = np.clip(np.asarray(p, dtype=np.float64), 0.0, None)
        p = p / p.sum()
        infos = np.array([_mutual_information_batch(p[None, :], rows)[0] for rows in self.rows])
        value = float(np.min(infos))
        if value > self.lower:
            self.lower = value
            self.best_input = p
        return infos

    def _offer_weights(self, weights, warm_start=None):
        if warm_start is not None:
            # keep every symbol alive, the multiplicative update never revives a zero
            warm_start = 0.999 * warm_start + 0.001 / warm_start.size
        solver = BlahutArimoto(stacked_channel(self.family, weights), tol=self.tol * 1e-3,
                               max_iterations=ITERATION_CAPS['blahut_arimoto'] // 5,
                               initial_input=warm_start)
        try:
            solver.solve()
        except NumericError:
            pass
        if solver.upper < self.upper:
            self.upper = solver.upper
            self.best_weights = np.asarray(weights, dtype=np.float64)
        return solver.upper, solver.input

    def _grid_start(self):
        num_inputs = self.family.num_inputs
        if num_inputs > 4:
            return
        grid = simplex_grid(num_inputs, GRID_DEFAULTS['input_simplex_resolution'])
        values = np.min(np.stack([_mutual_information_batch(grid, rows) for rows in self.rows]), axis=0)
        self._offer_input(grid[int(np.argmax(values))])

    def _polish_primal(self, start):
        num_inputs = self.family.num_inputs

        def objective(z):
            return -z[-1]

        def objective_grad(z):
            g = np.zeros_like(z)
            g[-1] = -1.0
            return g

        constraints = [{'type': 'eq', 'fun': lambda z: np.sum(z[:-1]) - 1.0}]
        for rows in self.rows:
            constraints.append({
                'type': 'ineq',
                'fun': lambda z, rows=rows: _mutual_information_batch(
                    np.clip(z[None, :-1], 0.0, None), rows)[0] - z[-1]})
        start = np.asarray(start, dtype=np.float64)
        z0 = np.append(start, float(np.min(self._offer_input(start))))
        bounds = [(0.0, 1.0)] * num_inputs + [(0.0, None)]
        result = minimize(objective, z0, jac=objective_grad, method='SLSQP', bounds=bounds,
                          constraints=constraints, options={'ftol': 1e-15, 'maxiter': 500})
        self._offer_input(result.x[:-1])

    def _polish_dual(self, start, warm_input):
        cache = {'input': warm_input}

        def value_and_grad(weights):
            weights = np.clip(weights, 0.0, None)
            weights = weights / weights.sum()
            upper, p = self._offer_weights(weights, cache['input'])
            cache['input'] = p
            return upper, np.array([_mutual_information_batch(p[None, :], rows)[0] for rows in self.rows])

        size = len(self.family)
        minimize(value_and_grad, start, jac=True, method='SLSQP', bounds=[(0.0, 1.0)] * size,
                 constraints=[{'type': 'eq', 'fun': lambda w: np.sum(w) - 1.0}],
                 options={'ftol': 1e-15, 'maxiter': 200})

    def solve(self):
        """
        Brackets the compound capacity

        Returns:
            tuple: (capacity in bits, input distribution achieving the lower bound)

        Raises:
            NumericError: If the bracket stays wider than the tolerance
        """
        if len(self.family) == 1:
            value, p = capacity(self.family[0], self.tol)
            return value, np.array(p)
        self._grid_start()
        size = len(self.family)
        weights = np.full(size, 1.0 / size)
        warm = None
        average = np.zeros(self.family.num_inputs)
        for iteration in range(1, self.max_iterations + 1):
            _, p = self._offer_weights(weights, warm)
            warm = p
            infos = self._offer_input(p)
            average += (p - average) / iteration
            self._offer_input(average)
            if self.upper - self.lower <= self.tol:
                break
            if iteration % 50 == 0:
                self._polish_primal(self.best_input)
                self._polish_dual(self.best_weights, warm)
                if self.upper - self.lower <= self.tol:
                    break
            # mirror descent on the weights, gradient = per-channel informations
            weights = weights * np.exp2(-4.0 / np.sqrt(iteration) * (infos - infos.min()))
            weights = weights / weights.sum()
        if self.upper - self.lower > self.tol:
            raise NumericError(
                f"Compound capacity bracket [{self.lower:.12f}, {self.upper:.12f}] wider than {self.tol}",
                bracket=(self.lower, self.upper))
        self.log(f"Compound capacity {self.lower:.9f} (gap {self.upper - self.lower:.2e})")
        return self.lower, self.best_input


def compound_capacity_nofeedback(family, tol=None, feedback=None):
    """
    Compound capacity without feedback, max over P of min_l I(P, Q_l)

    Args:
        family (CompoundFamily): The family
        tol (float, optional): Bracket width at termination
        feedback (Feedback, optional): Feedback object for reporting logs

    Returns:
        float: Capacity in bits
    """
    value, _ = CompoundCapacitySolver(family, tol, feedback=feedback).solve()
    return value


def tilted_distribution(p, q, lam):
    """
    Geometric mixture proportional to p^(1-lam) q^lam

    Args:
        p (array_like): First distribution
        q (array_like): Second distribution
        lam (float): Tilt in [0, 1]

    Returns:
        np.ndarray: Normalized tilted distribution
    """
    p = as_distribution(p, name='p')
    q = as_distribution(q, size=p.size, name='q')
    with np.errstate(divide='ignore'):
        weights = np.power(p, 1.0 - lam) * np.power(q, lam)
    total = weights.sum()
    if total <= 0:
        raise ArgumentError("Tilted distribution undefined for disjoint supports")
    return weights / total


def weighted_chernoff(rows_a, rows_b, weights):
    """
    Composition-weighted Chernoff information

    max over lam in [0, 1] of -sum_x w(x) log2 sum_y A(y|x)^(1-lam) B(y|x)^lam

    Args:
        rows_a (np.ndarray): Output laws of the first hypothesis, one row per symbol
        rows_b (np.ndarray): Output laws of the second hypothesis
        weights (array_like): Symbol usage fractions

    Returns:
        tuple: (exponent in bits, optimal tilt)
    """
    rows_a = np.atleast_2d(np.asarray(rows_a, dtype=np.float64))
    rows_b = np.atleast_2d(np.asarray(rows_b, dtype=np.float64))
    weights = np.asarray(weights, dtype=np.float64)
    used = weights > 0
    rows_a, rows_b, weights = rows_a[used], rows_b[used], weights[used]

    def negative_exponent(lam):
        with np.errstate(divide='ignore'):
            sums = np.sum(np.power(rows_a, 1.0 - lam) * np.power(rows_b, lam), axis=1)
            return float(weights @ np.log2(sums))

    # disjoint supports on a used symbol: the hypotheses separate perfectly
    interior = negative_exponent(0.5)
    if np.isneginf(interior):
        return np.inf, 0.5
    result = minimize_scalar(negative_exponent, bounds=(0.0, 1.0), method='bounded',
                             options={'xatol': 1e-12})
    return max(0.0, -float(result.fun)), float(result.x)


def chernoff_information(p, q):
    """
    Chernoff information between two distributions

    Args:
        p (array_like): First distribution
        q (array_like): Second distribution

    Returns:
        tuple: (value in bits, optimal tilt)
    """
    p = as_distribution(p, name='p')
    q = as_distribution(q, size=p.size, name='q')
    return weighted_chernoff(p[None, :], q[None, :], [1.0])


def information_density_moments(input_distribution, decode_channel, true_channel):
    """
    Mean and variance of log2 Qd(y|x) / (P Qd)(y) with x ~ P and y ~ Qt(.|x)

    Args:
        input_distribution (array_like): Codeword symbol distribution P
        decode_channel (Dmc): Channel assumed by the decoder
        true_channel (Dmc): Channel producing the outputs

    Returns:
        tuple: (mean, variance) in bits and bits squared; (-inf, inf) if the
            decoder rules out outputs that occur
    """
    p = as_distribution(input_distribution, size=decode_channel.num_inputs, name='input distribution')
    output = p @ decode_channel.rows
    used = p > 0
    joint = p[used, None] * true_channel.rows[used]
    with np.errstate(divide='ignore', invalid='ignore'):
        density = np.log2(decode_channel.rows[used]) - np.log2(output)[None, :]
    occurring = joint > 0
    if np.any(np.isneginf(density[occurring])):
        return -np.inf, np.inf
    values = density[occurring]
    weights = joint[occurring]
    mean = float(weights @ values)
    variance = float(max(0.0, weights @ (values - mean) ** 2))
    return mean, variance


def channel_dispersion(channel, input_distribution=None):
    """
    Variance of the information density at the capacity-achieving input

    Args:
        channel (Dmc): The channel
        input_distribution (array_like, optional): Input, capacity-achieving by default

    Returns:
        float: Dispersion in bits squared
    """
    if input_distribution is None:
        input_distribution = capacity(channel)[1]
    return information_density_moments(input_distribution, channel, channel)[1]
