# -*- coding: utf-8 -*-
"""
Part of the compound_feedback package
Licensed under GPL v2+
"""
import logging

LOGGER_NAME = 'compound_feedback'


class Feedback:
    """Progress and message sink handed to long running computations.

    Offers the same methods as a processing feedback object (``pushInfo``,
    ``pushWarning``, ``reportError``, ``setProgress``, ``isCanceled``) and
    forwards everything to the standard logging module.
    """

    def __init__(self, logger=None):
        """
        Args:
            logger (logging.Logger, optional): Target logger, defaults to the package logger
        """
        self.logger = logger or logging.getLogger(LOGGER_NAME)
        self.progress = 0.0
        self._canceled = False

    def pushInfo(self, message):
        self.logger.info(message)

    def pushDebugInfo(self, message):
        self.logger.debug(message)

    def pushWarning(self, message):
        self.logger.warning(message)

    def reportError(self, message, fatalError=False):
        """
        Logs an error

        Args:
            message (str): The error message
            fatalError (bool): Whether the computation cannot continue
        """
        if fatalError:
            self.logger.critical(message)
        else:
            self.logger.error(message)

    def setProgress(self, progress):
        """
        Records progress in percent

        Args:
            progress (float): Percentage between 0 and 100
        """
        self.progress = max(0.0, min(100.0, float(progress)))
        self.logger.debug("progress %.1f%%", self.progress)

    def cancel(self):
        self._canceled = True

    def isCanceled(self):
        return self._canceled


def log_to(feedback, message):
    """
    Logs a message to the feedback object, or to the package logger if there is none

    Args:
        feedback (Feedback): Feedback object or None
        message (str): The message to log
    """
    if feedback:
        feedback.pushInfo(message)
    else:
        logging.getLogger(LOGGER_NAME).info(message)


def configure_logging(verbose=False, stream=None):
    """
    Installs a stderr handler on the package logger

    Args:
        verbose (bool): DEBUG level if True, INFO otherwise
        stream (file, optional): Output stream, defaults to sys.stderr
    """
    logger = logging.getLogger(LOGGER_NAME)
    # one console handler per process, rebound to the latest stream
    for handler in [h for h in logger.handlers if getattr(h, 'compound_console', False)]:
        logger.removeHandler(handler)
    handler = logging.StreamHandler(stream)
    handler.compound_console = True
    handler.setFormatter(logging.Formatter('%(asctime)s %(levelname)s %(message)s'))
    logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    return logger
