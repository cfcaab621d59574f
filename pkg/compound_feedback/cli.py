# -*- coding: utf-8 -*-
"""
Part of the compound_feedback package
Licensed under GPL v2+

Command line front end: one subcommand per registered algorithm.
"""
import argparse
import logging
import sys

from . import __version__
from .algorithms import CONVERTERS, ProcessingContext, ProcessingParameter
from .definitions import EXIT_CODES
from .exceptions import (ArgumentError, CapabilityError, CompoundChannelException, ConfigError,
                         DegenerateChannelError, InfeasibleRateError, RunawayError)
from .feedback import LOGGER_NAME, Feedback, configure_logging
from .provider import CompoundFeedbackProvider


def exit_code(error):
    """
    Maps an exception to the process exit code

    Args:
        error (Exception): The exception that ended the command

    Returns:
        int: 2 configuration, 3 epoch cap, 4 capability, 1 anything else
    """
    if isinstance(error, (ConfigError, ArgumentError, InfeasibleRateError, DegenerateChannelError)):
        return EXIT_CODES['config']
    if isinstance(error, RunawayError):
        return EXIT_CODES['runaway']
    if isinstance(error, CapabilityError):
        return EXIT_CODES['capability']
    return EXIT_CODES['numeric']


def _add_parameter(parser, parameter):
    flag = parameter.flag or '--' + parameter.name.lower().replace('_', '-')
    if parameter.type == ProcessingParameter.Assignments:
        parser.add_argument(flag, dest=parameter.name, action='append', default=None,
                            metavar='KEY=VALUE', help=parameter.description)
        return
    required = not parameter.optional and parameter.defaultValue is None
    parser.add_argument(flag, dest=parameter.name, type=CONVERTERS[parameter.type],
                        default=None, required=required, help=parameter.description)


def build_parser(provider=None):
    """
    Argument parser with one subcommand per algorithm of the provider

    Returns:
        argparse.ArgumentParser: The parser
    """
    provider = provider or CompoundFeedbackProvider()
    parser = argparse.ArgumentParser(prog='compound_feedback', description=provider.longName())
    parser.add_argument('--version', action='version', version=__version__)
    subparsers = parser.add_subparsers(dest='command', metavar='command')
    subparsers.required = True
    for algorithm in provider.algorithms():
        sub = subparsers.add_parser(algorithm.name(), help=algorithm.shortHelpString(),
                                    description=algorithm.shortHelpString())
        sub.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
        for parameter in algorithm.parameterDefinitions():
            _add_parameter(sub, parameter)
    return parser


def run_algorithm(name, parameters, stdout=None, feedback=None, provider=None):
    """
    Runs a registered algorithm

    Args:
        name (str): Algorithm name
        parameters (dict): Parameter values keyed by parameter name
        stdout (file, optional): Stream receiving results without a destination file
        feedback (Feedback, optional): Feedback object for reporting logs

    Returns:
        dict: Results of processAlgorithm
    """
    provider = provider or CompoundFeedbackProvider()
    algorithm = provider.algorithm(name)
    context = ProcessingContext(stdout=stdout or sys.stdout)
    return algorithm.processAlgorithm(parameters, context, feedback or Feedback())


def cmd_capacity(config=None, overrides=None, out=None, stdout=None):
    return run_algorithm('capacity', {'CONFIG': config, 'SET': overrides, 'OUTPUT': out}, stdout)


def cmd_phi_curve(p, grid_size=None, out=None, stdout=None):
    return run_algorithm('phi-curve', {'P': p, 'GRID_SIZE': grid_size, 'OUTPUT': out}, stdout)


def cmd_simulate(config=None, overrides=None, out=None, jobs=1, transcripts=None, stdout=None):
    return run_algorithm('simulate', {'CONFIG': config, 'SET': overrides, 'OUTPUT': out, 'JOBS': jobs,
                                      'TRANSCRIPTS': transcripts}, stdout)


def cmd_oracle_check(config=None, overrides=None, out=None, jobs=1, stdout=None):
    return run_algorithm('oracle-check', {'CONFIG': config, 'SET': overrides, 'OUTPUT': out, 'JOBS': jobs},
                         stdout)


def cmd_exponents(config=None, overrides=None, out=None, stdout=None):
    return run_algorithm('exponents', {'CONFIG': config, 'SET': overrides, 'OUTPUT': out}, stdout)


def main(argv=None, stdout=None, stderr=None):
    """
    Entry point of ``python -m compound_feedback``

    Args:
        argv (list, optional): Arguments without the program name
        stdout (file, optional): Result stream
        stderr (file, optional): Log and error stream

    Returns:
        int: Process exit code
    """
    stderr = stderr or sys.stderr
    provider = CompoundFeedbackProvider()
    try:
        arguments = vars(build_parser(provider).parse_args(argv))
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_CODES['config']
    command = arguments.pop('command')
    configure_logging(arguments.pop('verbose', False), stderr)
    try:
        run_algorithm(command, arguments, stdout, Feedback(), provider)
    except CompoundChannelException as e:
        logging.getLogger(LOGGER_NAME).error("%s: %s", type(e).__name__, e)
        return exit_code(e)
    return EXIT_CODES['ok']
