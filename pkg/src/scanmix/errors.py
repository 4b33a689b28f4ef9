"""Exception hierarchy shared across the library.

Each class carries the process exit code the CLI maps it to:
2 = validation error, 3 = I/O or format error, 4 = degenerate input.
"""


class ScanMixError(Exception):
    """Base class for all scanmix errors."""

    exit_code = 2


class ValidationError(ScanMixError):
    """Arguments, parameters, or configuration violate a contract."""

    exit_code = 2


class PlanMismatchError(ValidationError):
    """A mix plan does not cover the data it is applied to."""


class PredictorContractError(ValidationError):
    """A predictor returned a score map violating its contract."""


class DataError(ScanMixError):
    """Values on disk or in arrays violate the data domain."""

    exit_code = 3


class FormatError(DataError):
    """A file's byte layout is malformed (truncation, bad record size)."""


class PairingError(DataError):
    """Paired files or arrays disagree (counts, missing partners)."""


class DegenerateInputError(ScanMixError):
    """Input is too empty or too uniform for the operation to proceed."""

    exit_code = 4


class UndefinedMetricError(DegenerateInputError):
    """A metric has no defined value (e.g. no class ever observed)."""
