# coding=utf-8
"""Tests of the message-phase codebooks."""

import unittest

import numpy as np

from ..channel_core import Dmc, bsc, session_rng
from ..codebook import (RandomCodebook, SurrogateCodebook, build_codebook, build_codebook_from_bits,
                        draw_uniform_int)
from ..exceptions import ArgumentError, InfeasibleRateError
from .utilities import IDENTITY


def block_error_rate(codebook, true_channel, trials, seed):
    errors = 0
    for trial in range(trials):
        rng = session_rng(seed, trial)
        message = codebook.draw_message(rng)
        errors += codebook.transmit(message, true_channel, rng) != message
    return errors / float(trials)


class RandomCodebookTest(unittest.TestCase):

    def test_single_message(self):
        """With M = 1 decoding never fails."""
        codebook = RandomCodebook(bsc(0.3), 0, 5, session_rng(1))
        self.assertEqual(codebook.num_messages, 1)
        self.assertEqual(block_error_rate(codebook, bsc(0.3), 200, 2), 0.0)

    def test_identity_channel_never_errs(self):
        channel = Dmc(IDENTITY)
        codebook = RandomCodebook(channel, 4, 8, session_rng(3))
        self.assertEqual(block_error_rate(codebook, channel, 500, 4), 0.0)

    def test_codewords_distinct(self):
        codebook = RandomCodebook(bsc(0.1), 6, 8, session_rng(5))
        self.assertEqual(np.unique(codebook.codewords, axis=0).shape[0], 64)

    def test_codewords_read_only(self):
        codebook = RandomCodebook(bsc(0.1), 2, 4, session_rng(5))
        with self.assertRaises(ValueError):
            codebook.codewords[0, 0] = 1

    def test_error_decreases_with_length(self):
        """At a fixed rate of 1/4 the block error falls as the block grows."""
        channel = bsc(0.1)
        rates = [block_error_rate(RandomCodebook(channel, n // 4, n, session_rng(6, n)), channel, 2000, n)
                 for n in (8, 24, 40)]
        self.assertGreater(rates[0], rates[2])
        self.assertLess(rates[2], 0.1)

    def test_decode_own_codeword(self):
        codebook = RandomCodebook(bsc(0.1), 1, 1, session_rng(7))
        decoded = codebook.decode(codebook.codewords[1])
        self.assertEqual(decoded, 1)

    def test_same_stream_same_codebook(self):
        first = RandomCodebook(bsc(0.2), 5, 12, session_rng(8, 12, 2 ** 31))
        again = RandomCodebook(bsc(0.2), 5, 12, session_rng(8, 12, 2 ** 31))
        np.testing.assert_array_equal(first.codewords, again.codewords)

    def test_message_out_of_range(self):
        codebook = RandomCodebook(bsc(0.1), 2, 4, session_rng(9))
        with self.assertRaises(ArgumentError):
            codebook.transmit(4, bsc(0.1), session_rng(10))


class SurrogateCodebookTest(unittest.TestCase):

    def test_matched_error_small_below_capacity(self):
        codebook = SurrogateCodebook(bsc(0.1), 200, 1000)
        self.assertLess(codebook.error_probability(bsc(0.1)), 1e-6)

    def test_error_grows_with_rate(self):
        low = SurrogateCodebook(bsc(0.1), 300, 1000).error_probability(bsc(0.1))
        high = SurrogateCodebook(bsc(0.1), 500, 1000).error_probability(bsc(0.1))
        self.assertLess(low, high)

    def test_mismatched_channel_fails(self):
        """Decoding for BSC(0.1) while BSC(0.9) is active almost always errs."""
        codebook = SurrogateCodebook(bsc(0.1), 200, 1000)
        self.assertGreater(codebook.error_probability(bsc(0.9)), 0.999)

    def test_wrong_decisions_differ_from_message(self):
        codebook = SurrogateCodebook(bsc(0.1), 20, 30)
        for trial in range(200):
            rng = session_rng(11, trial)
            message = codebook.draw_message(rng)
            decoded = codebook.transmit(message, bsc(0.9), rng)
            self.assertTrue(0 <= decoded < codebook.num_messages)
            self.assertNotEqual(decoded, message)

    def test_single_message(self):
        self.assertEqual(SurrogateCodebook(bsc(0.1), 0, 10).error_probability(bsc(0.9)), 0.0)


class BuildCodebookTest(unittest.TestCase):

    def test_explicit_and_surrogate(self):
        rng = session_rng(12)
        self.assertIsInstance(build_codebook_from_bits(bsc(0.1), 10, 40, rng), RandomCodebook)
        self.assertIsInstance(build_codebook_from_bits(bsc(0.1), 11, 40, rng), SurrogateCodebook)

    def test_rate_rounding(self):
        codebook = build_codebook(bsc(0.1), 0.25, 30, session_rng(13))
        self.assertEqual(codebook.message_bits, 8)

    def test_rate_at_capacity(self):
        with self.assertRaises(InfeasibleRateError):
            build_codebook(bsc(0.5), 0.1, 20, session_rng(14))
        with self.assertRaises(InfeasibleRateError):
            build_codebook_from_bits(bsc(0.1), 12, 20, session_rng(14))

    def test_zero_rate_allowed(self):
        self.assertEqual(build_codebook(bsc(0.5), 0.0, 20, session_rng(15)).num_messages, 1)

    def test_draw_uniform_int(self):
        rng = session_rng(16)
        values = [draw_uniform_int(rng, 2 ** 70) for _ in range(50)]
        self.assertTrue(all(0 <= v < 2 ** 70 for v in values))
        self.assertGreater(max(values), 2 ** 62)
        with self.assertRaises(ArgumentError):
            draw_uniform_int(rng, 0)


if __name__ == '__main__':
    unittest.main()
