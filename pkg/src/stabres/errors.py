"""Exception hierarchy shared by all modules.

Two broad classes matter to callers: validation errors (bad input, exit
code 2 in the CLI) and numeric errors (a computation could not be carried
out, exit code 3).
"""

from __future__ import annotations


class StabresError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class ValidationError(StabresError):
    """Invalid input: bad spec fields, malformed files, out-of-range values."""

    exit_code = 2


class SchemaError(ValidationError):
    """A file does not match its documented schema; carries line/field info."""


class MigrationError(ValidationError):
    """A session file declares an unknown schema version."""


class CrossingGuardError(ValidationError):
    """A fit range spans an avoided crossing; overridable with force."""

    def __init__(self, message: str, crossing=None):
        super().__init__(message)
        self.crossing = crossing


class NumericError(StabresError):
    """A numeric computation failed in a detectable way."""

    exit_code = 3


class NumericRangeError(NumericError):
    """Non-finite matrix element; carries the offending (m, n) index pair."""

    def __init__(self, message: str, index: tuple[int, int] | None = None):
        super().__init__(message)
        self.index = index


class IllConditionedOverlapError(NumericError):
    """Overlap matrix condition estimate exceeds the solver's limit."""


class TrackingAmbiguityError(NumericError):
    """Eigenvector-overlap tracking fell below the confidence threshold."""

    def __init__(self, message: str, at_value: float | None = None):
        super().__init__(message)
        self.at_value = at_value


class DegenerateDataError(NumericError):
    """Continued-fraction construction broke down even after reordering."""


class TrajectoryDegenerateError(NumericError):
    """Too large a fraction of trajectory points landed on poles."""


class NonConvergenceError(NumericError):
    """Iterative search oscillated without converging; carries its trace."""

    def __init__(self, message: str, trace: list | None = None):
        super().__init__(message)
        self.trace = trace or []
