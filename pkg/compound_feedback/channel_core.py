# -*- coding: utf-8 -*-
"""
Part of the compound_feedback package
Licensed under GPL v2+

Finite-alphabet channel models, the compound family and seeded sampling.
"""
import json

import numpy as np

from .definitions import TOLERANCES
from .exceptions import ArgumentError, ConfigError


class Dmc:
    def __init__(self, rows, name=None):
        """
        Initializes a discrete memoryless channel

        Args:
            rows (array_like): Transition matrix, rows[x][y] = Q(y|x)
            name (str, optional): Label used in logs and reports

        Raises:
            ArgumentError: If the matrix is not row stochastic
        """
        matrix = np.array(rows, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise ArgumentError("Transition matrix must be a non-empty 2D array")
        if not np.all(np.isfinite(matrix)):
            raise ArgumentError("Transition matrix contains non finite entries")
        check_rows(matrix)
        matrix.setflags(write=False)
        self.rows = matrix
        self.name = name
        # inverse CDF table used by the samplers
        self._cdf = np.cumsum(matrix, axis=1)
        self._cdf[:, -1] = 1.0
        self._cdf.setflags(write=False)

    @property
    def num_inputs(self):
        return self.rows.shape[0]

    @property
    def num_outputs(self):
        return self.rows.shape[1]

    def row(self, input_symbol):
        """
        Returns the output law Q(.|x)

        Args:
            input_symbol (int): Input symbol x

        Returns:
            np.ndarray: The row of the transition matrix
        """
        self._check_input(input_symbol)
        return self.rows[input_symbol]

    def _check_input(self, input_symbol):
        if not (0 <= int(input_symbol) < self.num_inputs):
            raise ArgumentError(f"Input symbol {input_symbol} out of range [0, {self.num_inputs})")

    def output_law(self, input_distribution):
        """
        Returns the output distribution PQ

        Args:
            input_distribution (array_like): Distribution over the input alphabet

        Returns:
            np.ndarray: Output distribution
        """
        return np.asarray(input_distribution, dtype=np.float64) @ self.rows

    def __eq__(self, other):
        return isinstance(other, Dmc) and self.rows.shape == other.rows.shape and np.array_equal(self.rows, other.rows)

    def __hash__(self):
        return hash(self.rows.tobytes())

    def __repr__(self):
        label = f"{self.name}, " if self.name else ""
        return f"Dmc({label}{self.num_inputs}x{self.num_outputs})"

    def to_list(self):
        return self.rows.tolist()


def check_rows(matrix, channel_index=None):
    """
    Verifies entries in [0, 1] and unit row sums without renormalizing

    Args:
        matrix (np.ndarray): Candidate transition matrix
        channel_index (int, optional): Index reported in the error message

    Raises:
        ArgumentError: On the first offending row
    """
    prefix = f"channel {channel_index}, " if channel_index is not None else ""
    for x, row in enumerate(matrix):
        if np.any(row < 0.0) or np.any(row > 1.0):
            raise ArgumentError(f"{prefix}row {x}: entries must lie in [0, 1]")
        total = float(np.sum(row))
        if abs(total - 1.0) > TOLERANCES['row_sum']:
            raise ArgumentError(f"{prefix}row {x}: sums to {total!r}, expected 1")


class CompoundFamily:
    def __init__(self, channels):
        """
        Initializes a finite family of channels sharing their alphabets

        Args:
            channels (list): Dmc instances (or matrices), one per state

        Raises:
            ArgumentError: On empty families, mismatched alphabets or duplicate members
        """
        members = [c if isinstance(c, Dmc) else Dmc(c) for c in channels]
        if not members:
            raise ArgumentError("A compound family needs at least one channel")
        shape = members[0].rows.shape
        for index, channel in enumerate(members):
            if channel.rows.shape != shape:
                raise ArgumentError(
                    f"channel {index}: alphabet sizes {channel.rows.shape} differ from {shape}")
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                if members[i] == members[j]:
                    raise ArgumentError(f"channels {i} and {j} are identical")
        self.channels = tuple(members)

    def __len__(self):
        return len(self.channels)

    def __getitem__(self, index):
        return self.channels[index]

    def __iter__(self):
        return iter(self.channels)

    @property
    def num_inputs(self):
        return self.channels[0].num_inputs

    @property
    def num_outputs(self):
        return self.channels[0].num_outputs

    def to_dict(self):
        return {'channels': [c.to_list() for c in self.channels]}

    def __repr__(self):
        return f"CompoundFamily(L={len(self)}, {self.num_inputs}x{self.num_outputs})"


def bsc(p):
    """
    Builds the binary symmetric channel with crossover probability p

    Args:
        p (float): Crossover probability in [0, 1]

    Returns:
        Dmc: [[1-p, p], [p, 1-p]]
    """
    if not (0.0 <= p <= 1.0):
        raise ArgumentError(f"Crossover probability {p} outside [0, 1]")
    return Dmc([[1.0 - p, p], [p, 1.0 - p]], name=f"BSC({p:g})")


def bsc_pair(p):
    """
    Builds the family {BSC(p), BSC(1-p)}

    Args:
        p (float): Crossover probability of the first member, p != 1/2

    Returns:
        CompoundFamily: Two member family
    """
    return CompoundFamily([bsc(p), bsc(1.0 - p)])


def sample_output(channel, input_symbol, rng):
    """
    Draws one channel output

    Args:
        channel (Dmc): The channel
        input_symbol (int): Input symbol
        rng (np.random.Generator): Random stream, exactly one uniform draw is consumed

    Returns:
        int: Output symbol
    """
    channel._check_input(input_symbol)
    u = rng.random()
    return int(np.searchsorted(channel._cdf[input_symbol], u, side='right'))


def sample_block(channel, inputs, rng):
    """
    Passes a block of inputs through the channel, independently per position

    Args:
        channel (Dmc): The channel
        inputs (array_like): Input symbols
        rng (np.random.Generator): Random stream, one uniform draw per position

    Returns:
        np.ndarray: Output symbols, same length as inputs
    """
    symbols = np.asarray(inputs, dtype=np.int64)
    if symbols.size == 0:
        return np.zeros(0, dtype=np.int64)
    if symbols.min() < 0 or symbols.max() >= channel.num_inputs:
        raise ArgumentError(f"Input symbols out of range [0, {channel.num_inputs})")
    u = rng.random(symbols.size)
    cdf = channel._cdf[symbols]
    # first output whose cumulative probability exceeds u
    outputs = np.sum(cdf <= u[:, None], axis=1)
    return np.minimum(outputs, channel.num_outputs - 1).astype(np.int64)


def session_rng(seed, *keys):
    """
    Derives an independent random stream from a seed and integer keys

    Args:
        seed (int): 64-bit unsigned experiment seed
        *keys (int): Stream coordinates, e.g. (n, channel index, session index)

    Returns:
        np.random.Generator: Generator seeded from SeedSequence(seed, spawn_key=keys)
    """
    if not (0 <= int(seed) < 2 ** 64):
        raise ArgumentError(f"Seed {seed} is not a 64-bit unsigned integer")
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys)))


def family_from_dict(data):
    """
    Builds a family from its JSON description

    Args:
        data (dict): {"channels": [matrix, ...]} or {"bsc_pair": p}

    Returns:
        CompoundFamily: The family

    Raises:
        ConfigError: With the channel and row index of the first violation
    """
    if not isinstance(data, dict):
        raise ConfigError("family: expected an object")
    if 'bsc_pair' in data:
        try:
            return bsc_pair(float(data['bsc_pair']))
        except (ArgumentError, TypeError, ValueError) as e:
            raise ConfigError(f"family.bsc_pair: {e}")
    channels = data.get('channels')
    if not isinstance(channels, list) or not channels:
        raise ConfigError("family.channels: expected a non-empty list of matrices")
    members = []
    for index, rows in enumerate(channels):
        try:
            matrix = np.array(rows, dtype=np.float64)
        except (TypeError, ValueError):
            raise ConfigError(f"family.channels[{index}]: not a numeric matrix")
        if matrix.ndim != 2:
            raise ConfigError(f"family.channels[{index}]: not a rectangular matrix")
        try:
            check_rows(matrix, channel_index=index)
            members.append(Dmc(matrix))
        except ArgumentError as e:
            raise ConfigError(f"family.channels[{index}]: {e}")
    try:
        return CompoundFamily(members)
    except ArgumentError as e:
        raise ConfigError(f"family: {e}")


def load_family(path):
    """
    Reads a family definition file

    Args:
        path (str): JSON file with a "channels" entry

    Returns:
        CompoundFamily: The family
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Could not read family file {path}: {e}")
    return family_from_dict(data)
