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

from . import __version__
from .algorithms import (CapacityAlgorithm, ExponentsAlgorithm, OracleCheckAlgorithm,
                         PhiCurveAlgorithm, SimulateAlgorithm)
from .exceptions import ArgumentError


class CompoundFeedbackProvider:

    def __init__(self):
        """
        Default constructor.
        """
        self._algorithms = {}
        self.loadAlgorithms()

    def addAlgorithm(self, algorithm):
        self._algorithms[algorithm.name()] = algorithm

    def loadAlgorithms(self):
        """
        Loads all algorithms belonging to this provider.
        """
        self.addAlgorithm(CapacityAlgorithm())
        self.addAlgorithm(PhiCurveAlgorithm())
        self.addAlgorithm(SimulateAlgorithm())
        self.addAlgorithm(OracleCheckAlgorithm())
        self.addAlgorithm(ExponentsAlgorithm())

    def algorithms(self):
        return list(self._algorithms.values())

    def algorithm(self, name):
        """
        Returns a fresh instance of a registered algorithm

        Args:
            name (str): Algorithm name, e.g. "simulate"

        Raises:
            ArgumentError: If no algorithm has this name
        """
        if name not in self._algorithms:
            raise ArgumentError(f"Unknown algorithm '{name}'")
        return self._algorithms[name].createInstance()

    def id(self):
        return "compoundfeedback"

    def name(self):
        return "Compound channel feedback coding"

    def longName(self):
        return f"{self.name()} (version {__version__})"
