# -*- coding: utf-8 -*-
"""
Part of the compound_feedback package
Licensed under GPL v2+

Experiment configuration: JSON file, dotted overrides and the seed
environment variable.
"""
import copy
import json
import os
from dataclasses import dataclass, field, fields

import numpy as np

from .channel_core import family_from_dict
from .definitions import MONTE_CARLO_DEFAULTS, SCHEME_DEFAULTS, SEED_ENVIRONMENT_VARIABLE, TOLERANCES
from .detection import make_rule
from .exceptions import ArgumentError, CompoundChannelException, ConfigError
from .infotheory import capacity_vector

RATE_MODES = ('absolute', 'capacity_fraction')
ESTIMATOR_KINDS = ('ml', 'bsc-threshold')
SCHEME_KEYS = tuple(SCHEME_DEFAULTS.keys())
LENGTH_KEYS = ('n', 'alpha_m', 'alpha_c', 'beta_m', 'beta_c', 'message_bits')


@dataclass
class ExperimentConfig:
    """Everything a command needs to rebuild an experiment."""
    family: dict
    rates: list = None
    rate_mode: str = 'capacity_fraction'
    estimator: dict = field(default_factory=lambda: {'kind': 'ml'})
    n_schedule: list = field(default_factory=lambda: [128, 256, 512])
    sessions: int = MONTE_CARLO_DEFAULTS['sessions']
    seed: int = MONTE_CARLO_DEFAULTS['seed']
    reference_index: int = 0
    chunk_size: int = MONTE_CARLO_DEFAULTS['chunk_size']
    outputs: dict = field(default_factory=dict)
    scheme: dict = field(default_factory=dict)
    lengths: dict = None
    tolerance: float = TOLERANCES['capacity']

    @classmethod
    def from_dict(cls, data):
        """
        Validates and builds a configuration

        Args:
            data (dict): Parsed JSON object

        Returns:
            ExperimentConfig: The configuration

        Raises:
            ConfigError: Naming the offending field
        """
        if not isinstance(data, dict):
            raise ConfigError("configuration: expected a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"configuration: unknown field(s) {', '.join(unknown)}")
        if 'family' not in data:
            raise ConfigError("family: missing")
        config = cls(**copy.deepcopy(data))
        config.validate()
        return config

    def to_dict(self):
        return {f.name: copy.deepcopy(getattr(self, f.name)) for f in fields(self)}

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def build_family(self):
        return family_from_dict(self.family)

    def validate(self):
        family = self.build_family()
        size = len(family)
        if not _is_int(self.sessions) or self.sessions < 1:
            raise ConfigError("sessions: must be an integer >= 1")
        if not _is_int(self.seed) or not (0 <= self.seed < 2 ** 64):
            raise ConfigError("seed: must be a 64-bit unsigned integer")
        if not _is_int(self.chunk_size) or self.chunk_size < 1:
            raise ConfigError("chunk_size: must be an integer >= 1")
        if not _is_int(self.reference_index) or not (0 <= self.reference_index < size):
            raise ConfigError(f"reference_index: must lie in [0, {size})")
        if not isinstance(self.n_schedule, list) or not self.n_schedule:
            raise ConfigError("n_schedule: expected a non-empty list")
        for index, n in enumerate(self.n_schedule):
            if not _is_int(n) or n < 2:
                raise ConfigError(f"n_schedule[{index}]: must be an integer >= 2")
            if index > 0 and n <= self.n_schedule[index - 1]:
                raise ConfigError("n_schedule: must be strictly increasing")
        if not isinstance(self.tolerance, (int, float)) or not self.tolerance > 0:
            raise ConfigError("tolerance: must be positive")
        if self.rate_mode not in RATE_MODES:
            raise ConfigError(f"rate_mode: expected one of {', '.join(RATE_MODES)}")
        if not isinstance(self.outputs, dict):
            raise ConfigError("outputs: expected an object")
        self._validate_scheme()
        self._validate_estimator(family)
        self._validate_rates(family)
        if self.lengths is not None:
            self._validate_lengths(size)

    def _validate_scheme(self):
        if not isinstance(self.scheme, dict):
            raise ConfigError("scheme: expected an object")
        for key, value in self.scheme.items():
            if key not in SCHEME_KEYS:
                raise ConfigError(f"scheme.{key}: unknown option")
            if not isinstance(value, (int, float)) or isinstance(value, bool) or value < 0:
                raise ConfigError(f"scheme.{key}: must be a non-negative number")
        if 'slack_exponent' in self.scheme and not (0 < self.scheme['slack_exponent'] < 1):
            raise ConfigError("scheme.slack_exponent: must lie in (0, 1)")
        for key in ('max_epochs', 'max_explicit_codewords'):
            if key in self.scheme and (not _is_int(self.scheme[key]) or self.scheme[key] < 1):
                raise ConfigError(f"scheme.{key}: must be a positive integer")

    def _validate_estimator(self, family):
        if not isinstance(self.estimator, dict) or self.estimator.get('kind') not in ESTIMATOR_KINDS:
            raise ConfigError(f"estimator.kind: expected one of {', '.join(ESTIMATOR_KINDS)}")
        try:
            self.rules(family)
        except ArgumentError as e:
            raise ConfigError(f"estimator: {e}")

    def _validate_rates(self, family):
        if self.rates is None:
            return
        if not isinstance(self.rates, list) or len(self.rates) != len(family):
            raise ConfigError(f"rates: expected a list of {len(family)} numbers")
        for index, rate in enumerate(self.rates):
            if not isinstance(rate, (int, float)) or isinstance(rate, bool) or rate < 0:
                raise ConfigError(f"rates[{index}]: must be a non-negative number")
        capacities = capacity_vector(family, self.tolerance)
        for index, (rate, cap) in enumerate(zip(self.absolute_rates(family), capacities)):
            if rate >= cap:
                raise ConfigError(f"rates[{index}]: rate {rate:.6f} not below capacity {cap:.6f}")

    def _validate_lengths(self, size):
        if not isinstance(self.lengths, dict):
            raise ConfigError("lengths: expected an object")
        for key in LENGTH_KEYS:
            if key not in self.lengths:
                raise ConfigError(f"lengths.{key}: missing")
        for key in ('n', 'alpha_m', 'alpha_c'):
            if not _is_int(self.lengths[key]) or self.lengths[key] < 1:
                raise ConfigError(f"lengths.{key}: must be a positive integer")
        for key in ('beta_m', 'beta_c', 'message_bits'):
            values = self.lengths[key]
            if not isinstance(values, list) or len(values) != size or not all(_is_int(v) for v in values):
                raise ConfigError(f"lengths.{key}: expected {size} integers")
            minimum = 0 if key == 'message_bits' else 1
            if any(v < minimum for v in values):
                raise ConfigError(f"lengths.{key}: entries must be >= {minimum}")

    def absolute_rates(self, family=None):
        """
        Rates in bits per use

        Args:
            family (CompoundFamily, optional): Built from the configuration if omitted

        Returns:
            np.ndarray: R_l, a quarter of capacity when no rates are configured
        """
        family = family or self.build_family()
        capacities = capacity_vector(family, self.tolerance)
        if self.rates is None:
            return 0.25 * capacities
        rates = np.array(self.rates, dtype=np.float64)
        if self.rate_mode == 'capacity_fraction':
            return rates * capacities
        return rates

    def rules(self, family=None):
        """
        Estimation rules of the two training phases

        Returns:
            tuple: (rule_m, rule_c)
        """
        family = family or self.build_family()
        kind = self.estimator.get('kind')
        if kind == 'bsc-threshold':
            return (make_rule(family, kind, self.estimator.get('q_m', 0.5)),
                    make_rule(family, kind, self.estimator.get('q_c', 0.5)))
        return make_rule(family, kind), make_rule(family, kind)

    def scheme_option(self, key):
        return self.scheme.get(key, SCHEME_DEFAULTS[key])


def _is_int(value):
    return isinstance(value, int) and not isinstance(value, bool)


def _parse_value(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_overrides(data, overrides):
    """
    Applies key=value assignments with dotted keys

    Args:
        data (dict): Parsed configuration, modified in place
        overrides (list): Strings such as "scheme.backoff=0.5"

    Returns:
        dict: The updated configuration
    """
    for assignment in overrides or []:
        if '=' not in assignment:
            raise ConfigError(f"--set {assignment}: expected key=value")
        key, text = assignment.split('=', 1)
        parts = key.strip().split('.')
        if not all(parts):
            raise ConfigError(f"--set {assignment}: empty key component")
        target = data
        for part in parts[:-1]:
            if not isinstance(target.get(part), dict):
                target[part] = {}
            target = target[part]
        target[parts[-1]] = _parse_value(text)
    return data


def load_config(path=None, overrides=None, environ=None, base=None):
    """
    Reads, overrides and validates a configuration

    Args:
        path (str, optional): JSON configuration file
        overrides (list, optional): Dotted key=value assignments
        environ (dict, optional): Environment, os.environ by default
        base (dict, optional): Configuration used when no file is given

    Returns:
        ExperimentConfig: The validated configuration

    Raises:
        ConfigError: On unreadable files or invalid fields
    """
    environ = os.environ if environ is None else environ
    if path:
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}")
        except OSError as e:
            raise ConfigError(f"Could not read configuration {path}: {e}")
    else:
        data = copy.deepcopy(base) if base is not None else {}
    if not isinstance(data, dict):
        raise ConfigError("configuration: expected a JSON object")
    apply_overrides(data, overrides)
    if environ.get(SEED_ENVIRONMENT_VARIABLE):
        try:
            data['seed'] = int(environ[SEED_ENVIRONMENT_VARIABLE])
        except ValueError:
            raise ConfigError(f"{SEED_ENVIRONMENT_VARIABLE}: not an integer")
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as e:
        raise ConfigError(f"configuration: {e}")
    except ConfigError:
        raise
    except CompoundChannelException as e:
        raise ConfigError(str(e))
