"""
Exceptions raised by the low-rank approximation library.
"""


class LowRankError(Exception):
    """Base class for every error raised by the library."""


class ArgumentError(LowRankError, ValueError):
    """Bad shapes, ranks, smoothing parameters or solver configuration."""


class ParseError(LowRankError):
    """
    A MatrixMarket file could not be read.
    `line` is the 1-based line number of the offending line, when there is one.
    """
    def __init__(self, message, *, path=None, line=None):
        self.path = path
        self.line = line
        location = ''
        if path is not None:
            location = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            location = f"line {line}: "
        super().__init__(f"{location}{message}")


class NumericalFailure(LowRankError):
    """
    A computation did not converge or produced non-finite values.

    `estimate` carries a partial result (e.g. the last power-iteration estimate);
    `factors` and `iteration` carry the last finite solver iterate.
    """
    def __init__(self, message, *, estimate=None, factors=None, iteration=None):
        self.estimate = estimate
        self.factors = factors
        self.iteration = iteration
        super().__init__(message)


class DescentViolation(NumericalFailure):
    """The smoothed objective increased by more than the allowed tolerance."""


class StationaryStart(LowRankError):
    """The step-size denominator vanished: zero factors and a zero gradient."""
