"""Exception hierarchy.

The CLI maps these onto exit codes: input/data problems exit with 3,
numerical/estimation problems with 4 (argparse usage errors keep 2).
"""


class PleadersError(Exception):
    """Base class for all errors raised by this package."""


# -- input / data problems ---------------------------------------------------

class InvalidInputError(PleadersError, ValueError):
    """Malformed input data (non-finite values, shape mismatch, ...)."""


class InsufficientDataError(InvalidInputError):
    """Signal or field too short for the requested decomposition."""


class InvalidParameterError(PleadersError, ValueError):
    """Parameter outside its documented domain."""


class UnsupportedFilterError(InvalidParameterError):
    """Requested number of vanishing moments is not available."""


class UnsupportedOrderError(InvalidParameterError):
    """Fractional differentiation/integration order out of range."""


class ParameterInconsistencyError(InvalidParameterError):
    """Mutually inconsistent generator parameters."""


class ScaleTooSmallError(InvalidParameterError):
    """Fluctuation window too small for the detrending degree."""


class DegenerateDataError(PleadersError):
    """Data degenerate for the requested statistic (e.g. zero leaders
    hit by a negative moment).  Carries the offending octave."""

    def __init__(self, message: str, octave: int | None = None):
        super().__init__(message)
        self.octave = octave


# -- numerical / estimation problems -----------------------------------------

class NumericalError(PleadersError):
    """Base for estimation-time failures."""


class InsufficientScalesError(NumericalError):
    """Fewer usable octaves than a regression needs."""


class SingularRegressionError(NumericalError):
    """Regression weight system is singular."""


class InvalidCorrectionError(NumericalError):
    """Finite-size correction requested with a non-positive eta(p)."""


class InvalidExpansionError(NumericalError):
    """Log-cumulant expansion requires c2 < 0."""


class NoValidPError(NumericalError):
    """eta(p) <= 0 on the whole p grid: analysis needs prior integration."""


class EmbeddingFailureError(NumericalError):
    """Circulant embedding produced substantially negative eigenvalues."""
