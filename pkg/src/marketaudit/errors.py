"""Typed exceptions shared across the package."""
from __future__ import annotations


class MarketAuditError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInput(MarketAuditError):
    """An input that must contain data was empty."""


class MalformedRow(MarketAuditError):
    """A CSV row could not be parsed.

    Carries the 1-based line number (header counts as line 1).
    """

    def __init__(self, line: int, detail: str):
        super().__init__(f"line {line}: {detail}")
        self.line = line


class NonPositivePrice(MarketAuditError):
    """A close price was zero, negative, or not finite."""

    def __init__(self, line: int, detail: str):
        super().__init__(f"line {line}: {detail}")
        self.line = line


class NonMonotonicTimestamp(MarketAuditError):
    """Timestamps were not strictly increasing."""

    def __init__(self, line: int, detail: str):
        super().__init__(f"line {line}: {detail}")
        self.line = line


class DuplicateTimestamp(MarketAuditError):
    """The same timestamp appeared twice."""

    def __init__(self, line: int, detail: str):
        super().__init__(f"line {line}: {detail}")
        self.line = line


class InvalidParam(MarketAuditError):
    """A parameter was outside its documented range."""


class TooFewPoints(MarketAuditError):
    """A series was too short to partition as requested."""


class TooShort(MarketAuditError):
    """A series or prediction set was too short for the operation."""


class LengthMismatch(MarketAuditError):
    """Two sequences that must align had different lengths."""


class EmptySeries(MarketAuditError):
    """A price series that must contain points was empty."""


class ExhaustedDatasets(MarketAuditError):
    """All evaluation partitions have been consumed."""


class LedgerLocked(MarketAuditError):
    """Another writer holds the ledger lock."""


class LedgerMismatch(MarketAuditError):
    """A ledger was replayed against data with a different content digest."""


class SingularSystem(MarketAuditError):
    """The least-squares system is rank-deficient and ridge is zero."""


class DegenerateBaseline(MarketAuditError):
    """The persistence baseline has zero error, so relative skill is undefined."""


class ZeroFluctuation(MarketAuditError):
    """Targets never move, so the error-to-fluctuation ratio is undefined."""


class NoNonzeroMoves(MarketAuditError):
    """Every true movement is zero, so directional accuracy is undefined."""


class NonPositiveEquity(MarketAuditError):
    """An equity curve touched zero or went negative."""
