# -*- coding: utf-8 -*-

# /***************************************************************************
#  compound_feedback
#  Opportunistic variable-length feedback coding over compound channels
#  ***************************************************************************/

# /***************************************************************************
#  *                                                                         *
#  *   This program is free software; you can redistribute it and/or modify  *
#  *   it under the terms of the GNU General Public License as published by  *
#  *   the Free Software Foundation; either version 2 of the License, or     *
#  *   (at your option) any later version.                                   *
#  *                                                                         *
#  ***************************************************************************/

import io
import json
import os
import sys
from dataclasses import dataclass, field

from .analysis import EpochOracle, eer_lower_bound, phi_curve, trivial_upper_bound
from .definitions import GRID_DEFAULTS
from .exceptions import ArgumentError
from .experiment import load_config
from .infotheory import CompoundCapacitySolver, burnashev_b, capacity_vector, compound_capacity_feedback
from .simulation import (SIMULATION_COLUMNS, MonteCarloRunner, json_safe, oracle_comparison,
                         simulation_rows, write_csv, write_transcripts)

Z_LIMIT = 4.0


@dataclass
class ProcessingParameter:
    """Declared input of an algorithm; the command line builds one option per parameter."""
    name: str
    description: str
    type: str
    defaultValue: object = None
    optional: bool = False
    minValue: float = None
    maxValue: float = None
    flag: str = None

    Double = 'double'
    Integer = 'integer'
    String = 'string'
    File = 'file'
    FileDestination = 'file_destination'
    Assignments = 'assignments'

    def convert(self, value):
        """Command line or keyword value to the declared type, range checked."""
        if value is None:
            if self.defaultValue is None and not self.optional:
                raise ArgumentError(f"{self.description}: missing")
            value = self.defaultValue
        if value is None:
            return [] if self.type == self.Assignments else None
        if self.type == self.Assignments:
            return list(value)
        value = CONVERTERS[self.type](value)
        if self.minValue is not None and value < self.minValue:
            raise ArgumentError(f"{self.description}: {value} below {self.minValue}")
        if self.maxValue is not None and value > self.maxValue:
            raise ArgumentError(f"{self.description}: {value} above {self.maxValue}")
        return value


CONVERTERS = {
    ProcessingParameter.Double: float,
    ProcessingParameter.Integer: int,
    ProcessingParameter.String: str,
    ProcessingParameter.File: str,
    ProcessingParameter.FileDestination: str,
}


@dataclass
class ProcessingContext:
    """Where results go when no destination file is given."""
    stdout: object = field(default_factory=lambda: sys.stdout)


class ProcessingAlgorithm:
    """
    Base class of the command line algorithms

    Subclasses declare their parameters in initAlgorithm and do their work
    in processAlgorithm, which returns a dictionary of results.
    """

    CONFIG = 'CONFIG'
    SET = 'SET'
    OUTPUT = 'OUTPUT'
    JOBS = 'JOBS'

    def __init__(self):
        self._parameters = []
        self.initAlgorithm()

    def addParameter(self, parameter):
        self._parameters.append(parameter)

    def parameterDefinitions(self):
        return list(self._parameters)

    def parameterValue(self, parameters, name):
        for definition in self._parameters:
            if definition.name == name:
                return definition.convert(parameters.get(name))
        raise ArgumentError(f"Algorithm {self.name()} has no parameter {name}")

    def addConfigParameters(self):
        self.addParameter(ProcessingParameter(
            self.CONFIG, 'Experiment configuration (JSON)', ProcessingParameter.File,
            optional=True, flag='--config'))
        self.addParameter(ProcessingParameter(
            self.SET, 'Configuration override key=value (dotted keys, repeatable)',
            ProcessingParameter.Assignments, optional=True, flag='--set'))

    def addOutputParameter(self, description):
        self.addParameter(ProcessingParameter(
            self.OUTPUT, description, ProcessingParameter.FileDestination, optional=True, flag='--out'))

    def loadConfig(self, parameters):
        return load_config(self.parameterValue(parameters, self.CONFIG),
                           self.parameterValue(parameters, self.SET))

    def outputPath(self, parameters, config=None, key=None):
        """Destination file: the OUTPUT parameter, then the configured output, else None for stdout."""
        path = self.parameterValue(parameters, self.OUTPUT)
        if not path and config is not None and key:
            path = config.outputs.get(key)
        return path or None

    def writeOutput(self, path, text, context):
        if path:
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(path, 'w', encoding='utf-8', newline='') as f:
                f.write(text)
        else:
            context.stdout.write(text)

    def initAlgorithm(self, config=None):
        raise NotImplementedError

    def processAlgorithm(self, parameters, context, feedback):
        raise NotImplementedError

    def name(self):
        raise NotImplementedError

    def shortHelpString(self):
        return ''

    def createInstance(self):
        return type(self)()


def _json_text(report):
    return json.dumps(json_safe(report), indent=2, sort_keys=True) + '\n'


class CapacityAlgorithm(ProcessingAlgorithm):

    def initAlgorithm(self, config=None):
        self.addConfigParameters()
        self.addOutputParameter('Capacity report (JSON)')

    def processAlgorithm(self, parameters, context, feedback):
        config = self.loadConfig(parameters)
        family = config.build_family()
        feedback.pushInfo(f"Computing capacities of {len(family)} channel(s)...")
        burnashev = [burnashev_b(channel) for channel in family]
        no_feedback, best_input = CompoundCapacitySolver(family, config.tolerance, feedback=feedback).solve()
        report = {
            'capacity_vector': capacity_vector(family, config.tolerance).tolist(),
            'C_NF': no_feedback,
            'C_NF_input': best_input.tolist(),
            'C_F': compound_capacity_feedback(family, config.tolerance),
            'burnashev_vector': [b.value for b in burnashev],
            'burnashev_symbols': [[b.accept_symbol, b.reject_symbol] for b in burnashev],
        }
        path = self.outputPath(parameters, config, 'json')
        self.writeOutput(path, _json_text(report), context)
        return {self.OUTPUT: path, 'report': report}

    def name(self):
        return 'capacity'

    def shortHelpString(self):
        return 'Capacity vector, compound capacities with and without feedback and Burnashev constants.'


class PhiCurveAlgorithm(ProcessingAlgorithm):
    P = 'P'
    GRID_SIZE = 'GRID_SIZE'
    COLUMNS = ('q_c', 'E_p/B_p', 'E_1-p/B_1-p')

    def initAlgorithm(self, config=None):
        self.addParameter(ProcessingParameter(
            self.P, 'Crossover probability p of the BSC pair', ProcessingParameter.Double,
            flag='--p'))
        self.addParameter(ProcessingParameter(
            self.GRID_SIZE, 'Number of control thresholds', ProcessingParameter.Integer,
            defaultValue=GRID_DEFAULTS['phi_grid_size'], minValue=1, flag='--grid-size'))
        self.addOutputParameter('Curve (CSV)')

    def processAlgorithm(self, parameters, context, feedback):
        p = self.parameterValue(parameters, self.P)
        if not (0.0 < p < 0.5):
            raise ArgumentError(f"p={p} outside (0, 1/2)")
        curve = phi_curve(p, grid_size=self.parameterValue(parameters, self.GRID_SIZE))
        rows = [dict(zip(self.COLUMNS, (q,) + point.values)) for q, point in zip(curve.parameters, curve.points)]
        feedback.pushInfo(f"Scaled exponent curve of BSC({p}): {len(rows)} thresholds")
        buffer = io.StringIO()
        write_csv(rows, self.COLUMNS, buffer)
        path = self.outputPath(parameters)
        self.writeOutput(path, buffer.getvalue(), context)
        return {self.OUTPUT: path, 'rows': rows}

    def name(self):
        return 'phi-curve'

    def shortHelpString(self):
        return 'Exponent pairs of the BSC pair normalized by B(1 - R/C), swept over the control threshold.'


class SimulateAlgorithm(ProcessingAlgorithm):
    TRANSCRIPTS = 'TRANSCRIPTS'

    def initAlgorithm(self, config=None):
        self.addConfigParameters()
        self.addParameter(ProcessingParameter(
            self.JOBS, 'Worker processes', ProcessingParameter.Integer,
            defaultValue=1, minValue=1, flag='--jobs'))
        self.addOutputParameter('Statistics table (CSV)')
        self.addParameter(ProcessingParameter(
            self.TRANSCRIPTS, 'Session transcripts (JSON lines)', ProcessingParameter.FileDestination,
            optional=True, flag='--transcripts'))

    def processAlgorithm(self, parameters, context, feedback):
        config = self.loadConfig(parameters)
        transcripts_path = self.parameterValue(parameters, self.TRANSCRIPTS) or config.outputs.get('transcripts')
        runner = MonteCarloRunner(config, self.parameterValue(parameters, self.JOBS), feedback,
                                  keep_transcripts=bool(transcripts_path))
        results = runner.run()
        rows = simulation_rows(results)
        buffer = io.StringIO()
        write_csv(rows, SIMULATION_COLUMNS, buffer)
        path = self.outputPath(parameters, config, 'csv')
        self.writeOutput(path, buffer.getvalue(), context)
        if transcripts_path:
            dump = io.StringIO()
            write_transcripts(results, dump)
            self.writeOutput(transcripts_path, dump.getvalue(), context)
            feedback.pushInfo(f"Transcripts written to {transcripts_path}")
        return {self.OUTPUT: path, self.TRANSCRIPTS: transcripts_path, 'rows': rows}

    def name(self):
        return 'simulate'

    def shortHelpString(self):
        return 'Monte Carlo sessions for every block scale and channel, one CSV row per cell.'


class OracleCheckAlgorithm(ProcessingAlgorithm):

    def initAlgorithm(self, config=None):
        self.addConfigParameters()
        self.addParameter(ProcessingParameter(
            self.JOBS, 'Worker processes', ProcessingParameter.Integer,
            defaultValue=1, minValue=1, flag='--jobs'))
        self.addOutputParameter('Oracle report (JSON)')

    def processAlgorithm(self, parameters, context, feedback):
        config = self.loadConfig(parameters)
        runner = MonteCarloRunner(config, self.parameterValue(parameters, self.JOBS), feedback)
        params = runner.params_for(runner.schedule()[0])
        codebooks = runner.codebooks_for(params)
        oracle = EpochOracle(params, codebooks, feedback)
        channels = []
        with runner.worker_pool() as pool:
            for channel_index in range(len(runner.family)):
                exact = oracle.evaluate(channel_index)
                transcripts = runner.run_cell(params, codebooks, channel_index, pool)
                if transcripts is None:
                    break
                comparison = oracle_comparison(params, exact, transcripts)
                channels.append({'channel': channel_index, 'oracle': exact.to_dict(), 'comparison': comparison})
        passed = bool(channels) and all(abs(entry['z']) <= Z_LIMIT
                                        for channel in channels for entry in channel['comparison'].values())
        report = {'n': params.n, 'sessions': config.sessions, 'seed': config.seed,
                  'z_limit': Z_LIMIT, 'channels': channels, 'pass': passed}
        feedback.pushInfo(f"Oracle check {'passed' if passed else 'FAILED'}")
        path = self.outputPath(parameters, config, 'json')
        self.writeOutput(path, _json_text(report), context)
        return {self.OUTPUT: path, 'report': report}

    def name(self):
        return 'oracle-check'

    def shortHelpString(self):
        return 'Exact single-epoch enumeration against Monte Carlo sessions at a tiny configuration.'


class ExponentsAlgorithm(ProcessingAlgorithm):

    def initAlgorithm(self, config=None):
        self.addConfigParameters()
        self.addOutputParameter('Exponent bounds (JSON)')

    def processAlgorithm(self, parameters, context, feedback):
        config = self.loadConfig(parameters)
        runner = MonteCarloRunner(config, 1, feedback)
        lower = eer_lower_bound(runner.family, runner.rates, runner.control_exponents)
        upper = trivial_upper_bound(runner.family, runner.rates)
        report = {
            'rates': runner.rates.tolist(),
            'capacity_vector': capacity_vector(runner.family, config.tolerance).tolist(),
            'burnashev_vector': [burnashev_b(channel).value for channel in runner.family],
            'control_exponents': runner.control_exponents.tolist(),
            'lower_bound': list(lower.values),
            'upper_bound': list(upper.values),
        }
        path = self.outputPath(parameters, config, 'json')
        self.writeOutput(path, _json_text(report), context)
        return {self.OUTPUT: path, 'report': report}

    def name(self):
        return 'exponents'

    def shortHelpString(self):
        return 'Achievable and Burnashev upper exponent bounds of every channel for a configuration.'
