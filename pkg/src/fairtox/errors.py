"""Exception hierarchy shared across the pipeline.

Grouping matters for the CLI exit codes: configuration problems exit with 2,
data problems with 3, training divergence with 4.
"""


class FairtoxError(Exception):
    """Base class for all library errors."""


class ConfigError(FairtoxError):
    """Invalid or inconsistent experiment configuration."""


class DataError(FairtoxError):
    """Problem with an input data file or its contents."""


class SchemaError(DataError):
    """A required CSV column is missing."""

    def __init__(self, column: str, message: str | None = None):
        self.column = column
        super().__init__(message or f"missing required column: {column!r}")


class RowError(DataError):
    """A data row could not be parsed or violates a value constraint."""

    def __init__(self, row_number: int, message: str):
        self.row_number = row_number
        super().__init__(f"row {row_number}: {message}")


class GenerationError(FairtoxError):
    """Synthetic-text generation cannot satisfy the request."""


class ShapeError(FairtoxError):
    """Operand shapes are incompatible."""


class FitError(FairtoxError):
    """A model cannot be fitted on the given inputs."""


class DivergenceError(FairtoxError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch: int, batch_index: int):
        self.epoch = epoch
        self.batch_index = batch_index
        super().__init__(f"non-finite loss at epoch {epoch}, batch {batch_index}")


class UndefinedMetricError(FairtoxError):
    """Metric is undefined for the given inputs (e.g. single-class AUC)."""
