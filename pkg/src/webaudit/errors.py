"""Exception types shared across the toolkit."""


class AuditError(Exception):
    """Base class for all webaudit errors."""


class NoContentfulPaint(AuditError):
    """The page never painted content; the audit is failed, not scored 0."""


class IncompleteVisualProgress(AuditError):
    """Visual progress never reached 1.0, so the speed index is undefined."""


class InvalidCurve(AuditError):
    """A scoring curve whose point of diminishing returns is not below its median."""


class WeightMismatch(AuditError):
    """A weighted aggregate was asked for with a metric score missing."""


class CyclicPlan(AuditError):
    """A waterfall plan whose parent references form a cycle."""


class ParseError(AuditError):
    """A document that could not be parsed at all."""


class SchemaError(AuditError):
    """A parsed document with missing or invalid fields.

    ``path`` names the offending field, e.g. ``requests[3].end_ms``.
    """

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class Unreachable(AuditError):
    """The browser debugging endpoint could not be reached."""


class NavigationTimeout(AuditError):
    """A live navigation did not settle within the allowed time."""


class ConversionError(AuditError):
    """Captured browser events could not be converted to a trace."""


class CsvError(AuditError):
    """A corpus CSV row that failed validation."""

    def __init__(self, line: int, column: str | None, message: str):
        where = f"line {line}" if column is None else f"line {line}, column {column!r}"
        super().__init__(f"{where}: {message}")
        self.line = line
        self.column = column


class DuplicateUrl(AuditError):
    """A corpus URL that already appeared on an earlier line."""

    def __init__(self, line: int, url: str):
        super().__init__(f"line {line}: duplicate url {url}")
        self.line = line
        self.url = url


class UnknownFormat(AuditError):
    """An unsupported report output format."""
