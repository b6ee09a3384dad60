"""Exception hierarchy shared across the package.

Everything raised on purpose derives from QuizKitError so callers (CLI,
HTTP service) can map failures to exit codes / status codes in one place.
"""

from __future__ import annotations


class QuizKitError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class ParseError(QuizKitError):
    """A GIFT source error, located at a 1-based (line, column) position."""

    code = "parse_error"

    # kind values
    UNBALANCED_BRACE = "unbalanced_brace"
    UNTERMINATED_TITLE = "unterminated_title"
    UNSUPPORTED_GIFT_KIND = "unsupported_gift_kind"
    MALFORMED_WEIGHT = "malformed_weight"
    MALFORMED_NUMBER = "malformed_number"
    MALFORMED_BLOCK = "malformed_block"
    DUPLICATE_MATCH_LEFT = "duplicate_match_left"
    EMPTY_ANSWER = "empty_answer"

    def __init__(self, line: int, column: int, kind: str, message: str, filename: str | None = None):
        self.line = line
        self.column = column
        self.kind = kind
        self.message = message
        self.filename = filename
        super().__init__(str(self))

    def __str__(self) -> str:
        where = f"{self.filename}:" if self.filename else ""
        return f"{where}{self.line}:{self.column}: {self.kind}: {self.message}"

    def with_filename(self, filename: str) -> "ParseError":
        return ParseError(self.line, self.column, self.kind, self.message, filename)


class UnsupportedTypeError(QuizKitError):
    """Raised when a question type cannot be represented in the target format."""

    code = "unsupported_type"


class ManifestError(QuizKitError):
    """A quiz manifest or native bank file is structurally invalid."""

    code = "manifest_error"


class ValidationError(QuizKitError):
    """A quiz failed invariant validation; carries the violation list."""

    code = "validation_error"

    def __init__(self, violations):
        self.violations = list(violations)
        details = "; ".join(str(v) for v in self.violations)
        super().__init__(f"quiz validation failed: {details}")


class GradingError(QuizKitError):
    code = "grading_error"


class TypeMismatchError(GradingError):
    """Response variant does not match the question type."""

    code = "type_mismatch"


class OptionIndexError(GradingError):
    """A chosen option index is outside the question's option list."""

    code = "option_index"


class SessionError(QuizKitError):
    code = "session_error"


class WrongPhaseError(SessionError):
    code = "wrong_phase"


class ModeMismatchError(SessionError):
    code = "mode_mismatch"


class WrongModeError(SessionError):
    code = "wrong_mode"


class DeadlinePassedError(SessionError):
    """Submit arrived at/after the deadline; the session has been finalized."""

    code = "deadline_passed"


class LockActiveError(SessionError):
    """Feedback lock has not expired yet."""

    code = "lock_active"

    def __init__(self, remaining_seconds: float):
        self.remaining_seconds = remaining_seconds
        super().__init__(f"feedback locked for another {remaining_seconds:g}s")


class ClockRegressionError(SessionError):
    """An operation was invoked with a timestamp earlier than the last one seen."""

    code = "clock_regression"


class NotFinishedError(SessionError):
    code = "not_finished"


class AssemblyError(QuizKitError):
    code = "assembly_error"


class CountExceedsPoolError(AssemblyError):
    code = "count_exceeds_pool"


class DuplicateIdError(AssemblyError):
    code = "duplicate_id"


class StorageError(QuizKitError):
    code = "storage_error"


class StoreLockedError(StorageError):
    """Another writer already holds the store directory lock."""

    code = "store_locked"
