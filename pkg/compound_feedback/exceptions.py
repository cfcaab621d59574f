# -*- coding: utf-8 -*-
"""
Part of the compound_feedback package
Licensed under GPL v2+
"""


class CompoundChannelException(Exception):
    """Base class of every error raised by compound_feedback."""


class ArgumentError(CompoundChannelException, ValueError):
    """An argument violates a documented precondition."""


class ConfigError(CompoundChannelException):
    """The experiment configuration is malformed or inconsistent."""


class InfeasibleRateError(CompoundChannelException):
    """A requested rate is not strictly below the channel capacity."""


class DegenerateChannelError(CompoundChannelException):
    """The channel cannot support the control test (Burnashev constant is zero)."""


class CapabilityError(CompoundChannelException):
    """The request exceeds what the implementation can enumerate or search."""


class RunawayError(CompoundChannelException):
    """A session exceeded the epoch cap."""


class NumericError(CompoundChannelException):
    """An iterative solver did not reach its tolerance.

    Args:
        message (str): Description of the failure
        bracket (tuple, optional): Best (lower, upper) bounds reached
    """

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket
