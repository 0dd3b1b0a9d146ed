"""Exception types raised by the analysis pipeline."""


class AnalysisError(ValueError):
    """Base class for data-dependent failures (CLI exit code 1)."""


class ParseError(AnalysisError):
    """A price file could not be turned into a valid series."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InsufficientDataError(AnalysisError):
    """Too few points for the requested statistic."""


class ZeroVarianceError(InsufficientDataError):
    """Kurtosis is undefined for a sample without spread."""
