"""Exception hierarchy shared by every service.

Commands catch ``AuditError`` and turn it into a non-zero exit status; a
rejected fairness hypothesis is a result, never an exception.
"""


class AuditError(Exception):
    """Base class for all audit failures."""


class IngestionError(AuditError):
    """Malformed input data. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class SchemaError(AuditError):
    """Inconsistent feature specifications or schema file."""


class InvalidParameterError(AuditError, ValueError):
    """An argument is outside its documented domain."""


class ZeroVarianceError(InvalidParameterError):
    """Standardization requested on a constant column."""


class DegenerateDataError(AuditError):
    """The data cannot support the requested computation (missing stratum, single class, empty cluster)."""


class ModelError(AuditError):
    """Unknown preset, incompatible columns or unreadable model document."""


class FeatureError(AuditError):
    """Unknown feature or a value outside the feature's domain."""
