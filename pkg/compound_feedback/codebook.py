# -*- coding: utf-8 -*-
"""
Part of the compound_feedback package
Licensed under GPL v2+

Message-phase codebooks: explicit random codes with maximum-likelihood
decoding and a decoding-error model for message sets too large to store.
"""
import math

import numpy as np
from scipy.stats import norm

from .channel_core import sample_block
from .definitions import SCHEME_DEFAULTS
from .exceptions import ArgumentError, CapabilityError, InfeasibleRateError
from .infotheory import capacity, first_maximizer, information_density_moments

MAX_REGENERATIONS = 1000


def draw_uniform_int(rng, upper):
    """
    Uniform integer in [0, upper) of arbitrary size

    Args:
        rng (np.random.Generator): Random stream
        upper (int): Exclusive bound, at least 1

    Returns:
        int: Python integer
    """
    upper = int(upper)
    if upper < 1:
        raise ArgumentError("Upper bound must be positive")
    if upper <= 2 ** 62:
        return int(rng.integers(upper))
    bits = (upper - 1).bit_length()
    mask = (1 << bits) - 1
    while True:
        value = int.from_bytes(rng.bytes((bits + 7) // 8), 'little') & mask
        if value < upper:
            return value


class Codebook:
    """Common interface: M = 2**message_bits messages sent in block_length uses."""

    def __init__(self, channel, message_bits, block_length):
        if block_length < 1:
            raise ArgumentError("Block length must be positive")
        if message_bits < 0:
            raise ArgumentError("Message bits must be non-negative")
        self.channel = channel
        self.message_bits = int(message_bits)
        self.block_length = int(block_length)

    @property
    def num_messages(self):
        return 1 << self.message_bits

    @property
    def rate(self):
        return self.message_bits / float(self.block_length)

    def draw_message(self, rng):
        return draw_uniform_int(rng, self.num_messages)

    def transmit(self, message, true_channel, rng):
        """
        Sends a message over the true channel and decodes it for the codebook's channel

        Args:
            message (int): Message index
            true_channel (Dmc): Channel realized in the session
            rng (np.random.Generator): Random stream

        Returns:
            int: Decoded message
        """
        raise NotImplementedError

    def _check_message(self, message):
        if not (0 <= message < self.num_messages):
            raise ArgumentError(f"Message {message} out of range [0, 2**{self.message_bits})")


class RandomCodebook(Codebook):
    def __init__(self, channel, message_bits, block_length, rng, input_distribution=None):
        """
        Draws i.i.d. codewords from the input distribution, redrawing repeated
        codewords until all of them are distinct

        Args:
            channel (Dmc): Channel the decoder assumes
            message_bits (int): log2 of the number of messages
            block_length (int): Codeword length
            rng (np.random.Generator): Codebook random stream
            input_distribution (array_like, optional): Defaults to the capacity-achieving input
        """
        super().__init__(channel, message_bits, block_length)
        if input_distribution is None:
            input_distribution = capacity(channel)[1]
        self.input_distribution = np.asarray(input_distribution, dtype=np.float64)
        size = self.num_messages
        codewords = rng.choice(channel.num_inputs, size=(size, self.block_length), p=self.input_distribution)
        for attempt in range(MAX_REGENERATIONS):
            _, first = np.unique(codewords, axis=0, return_index=True)
            if first.size == size:
                break
            # redraw every later copy of a repeated codeword
            repeated = np.setdiff1d(np.arange(size), first)
            codewords[repeated] = rng.choice(channel.num_inputs, size=(repeated.size, self.block_length),
                                             p=self.input_distribution)
        else:
            raise CapabilityError(
                f"Could not draw {size} distinct codewords of length {self.block_length}")
        codewords.setflags(write=False)
        self.codewords = codewords
        with np.errstate(divide='ignore'):
            self._log_rows = np.log2(channel.rows)

    def decode(self, outputs):
        """
        Maximum-likelihood decoding, ties go to the smallest message

        Args:
            outputs (array_like): Channel outputs of one block

        Returns:
            int: Decoded message
        """
        outputs = np.asarray(outputs, dtype=np.int64)
        scores = self._log_rows[self.codewords, outputs[None, :]].sum(axis=1)
        return first_maximizer(scores)

    def transmit(self, message, true_channel, rng):
        self._check_message(message)
        outputs = sample_block(true_channel, self.codewords[message], rng)
        return self.decode(outputs)


class SurrogateCodebook(Codebook):
    def __init__(self, channel, message_bits, block_length, input_distribution=None):
        """
        Random code whose decoding errors are drawn from the finite blocklength
        normal approximation instead of decoding stored codewords

        Args:
            channel (Dmc): Channel the decoder assumes
            message_bits (int): log2 of the number of messages
            block_length (int): Codeword length
            input_distribution (array_like, optional): Defaults to the capacity-achieving input
        """
        super().__init__(channel, message_bits, block_length)
        if input_distribution is None:
            input_distribution = capacity(channel)[1]
        self.input_distribution = np.asarray(input_distribution, dtype=np.float64)
        self._error_cache = {}

    def error_probability(self, true_channel):
        """
        Block error probability when the outputs come from true_channel

        Args:
            true_channel (Dmc): Channel realized in the session

        Returns:
            float: Q((N mu - log2 M + log2(N)/2) / sqrt(N V)), mismatch included through (mu, V)
        """
        key = true_channel.rows.tobytes()
        if key in self._error_cache:
            return self._error_cache[key]
        if self.message_bits == 0:
            value = 0.0
        else:
            mean, variance = information_density_moments(self.input_distribution, self.channel, true_channel)
            n = self.block_length
            if np.isneginf(mean):
                value = 1.0
            else:
                margin = n * mean - self.message_bits + 0.5 * math.log2(n)
                if variance <= 0.0:
                    value = 0.0 if margin > 0 else 1.0
                else:
                    value = float(norm.sf(margin / math.sqrt(n * variance)))
        self._error_cache[key] = value
        return value

    def transmit(self, message, true_channel, rng):
        self._check_message(message)
        if rng.random() >= self.error_probability(true_channel):
            return message
        # wrong decision, uniform over the other messages
        offset = 1 + draw_uniform_int(rng, self.num_messages - 1)
        return (message + offset) % self.num_messages


def build_codebook_from_bits(channel, message_bits, block_length, rng, max_explicit=None):
    """
    Codebook for 2**message_bits messages of the given block length

    Args:
        channel (Dmc): Channel the decoder assumes
        message_bits (int): log2 M
        block_length (int): Codeword length
        rng (np.random.Generator): Codebook random stream
        max_explicit (int, optional): Largest M stored explicitly

    Returns:
        Codebook: RandomCodebook if M fits, SurrogateCodebook otherwise

    Raises:
        InfeasibleRateError: If log2 M / block_length is not below capacity
    """
    max_explicit = max_explicit or SCHEME_DEFAULTS['max_explicit_codewords']
    channel_capacity = capacity(channel)[0]
    rate = message_bits / float(block_length)
    if message_bits > 0 and rate >= channel_capacity:
        raise InfeasibleRateError(f"Codebook rate {rate:.6f} not below capacity {channel_capacity:.6f}")
    if (1 << int(message_bits)) <= max_explicit:
        return RandomCodebook(channel, message_bits, block_length, rng)
    return SurrogateCodebook(channel, message_bits, block_length)


def build_codebook(channel, rate, block_length, rng, max_explicit=None):
    """
    Random codebook with M = round(2**(block_length * rate)), rounded to a power of 2

    Args:
        channel (Dmc): Channel the decoder assumes
        rate (float): Target rate in bits per use
        block_length (int): Codeword length
        rng (np.random.Generator): Codebook random stream
        max_explicit (int, optional): Largest M stored explicitly

    Returns:
        Codebook: The codebook
    """
    if rate < 0:
        raise ArgumentError("Rate must be non-negative")
    channel_capacity = capacity(channel)[0]
    if rate > 0 and rate >= channel_capacity:
        raise InfeasibleRateError(f"Rate {rate} not below capacity {channel_capacity:.6f}")
    return build_codebook_from_bits(channel, int(round(block_length * rate)), block_length, rng, max_explicit)
