"""Exception hierarchy shared across the package."""

from __future__ import annotations


class SqlShieldError(Exception):
    """Base class for all errors raised by this package."""


class NotASelectError(SqlShieldError):
    """A query that is not a single SELECT was handed to a SELECT-only operation."""


class RepositoryFormatError(SqlShieldError):
    """The fingerprint repository XML is malformed or violates the expected layout."""


class ProfileFormatError(SqlShieldError):
    """The rule-profile file is malformed."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class KeywordFileError(SqlShieldError):
    """The keyword file is malformed."""


class LogDecodeError(SqlShieldError):
    """The query log contains bytes that do not decode as UTF-8."""

    def __init__(self, message: str, byte_offset: int):
        super().__init__(f"{message} (byte offset {byte_offset})")
        self.byte_offset = byte_offset


class TrainingError(SqlShieldError):
    """Training could not produce a usable profile."""


class BundleError(SqlShieldError):
    """A profile bundle directory is missing a file or a file cannot be parsed."""


class BundleIntegrityError(BundleError):
    """The files of a profile bundle are individually valid but mutually inconsistent."""
