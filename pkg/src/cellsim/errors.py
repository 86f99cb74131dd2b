"""Exception hierarchy shared by all cellsim modules.

Exit-code mapping used by the CLI: ValidationError -> 2,
NumericalError (and subclasses) -> 3, ParseError -> 4.
"""


class CellsimError(Exception):
    """Base class for all cellsim errors."""


class ValidationError(CellsimError, ValueError):
    """Bad domain input or inconsistent configuration.

    ``fields`` lists every offending field so a config can be fixed in
    one pass instead of whack-a-mole.
    """

    def __init__(self, message, fields=None):
        super().__init__(message)
        self.fields = list(fields) if fields else []


class NumericalError(CellsimError, RuntimeError):
    """Numerical failure (non-convergence, bandwidth leakage, ...)."""

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class GridRangeError(NumericalError):
    """Requested evaluation outside the sampled grid or feature not bracketed."""


class FitError(NumericalError):
    """Degenerate or non-identifiable fit input."""


class MetricError(NumericalError):
    """Pulse metric undefined (no unique peak, FWHM not bracketed, ...)."""


class ParseError(CellsimError, IOError):
    """Malformed input file; carries a 1-based line number when known."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
