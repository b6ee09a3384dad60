"""quizkit: GIFT-based quiz authoring, delivery, and results analysis.

Highlights:

- seven question types (true/false, multiple choice, multiple response,
  fill-in, matching, numeric range, hotspot) with exact-arithmetic grading;
- a GIFT parser/serializer for the six text-expressible types plus a native
  JSON bank format covering all seven;
- practice sessions (untimed, with a mandatory locked feedback review whose
  depth follows the quiz's QC1/QC2/QC3 tier) and evaluation sessions
  (timed, feedback-free, hard deadline cutoff);
- deterministic evaluation-test assembly from practice pools with
  provenance tracking;
- an append-only result store with averaged comparative reports,
  repeated-vs-fresh overlap analysis, and CSV export;
- a CLI (``quizkit``) and an HTTP service for delivery and reporting.
"""

from .assembly import AssemblyConfig, assemble_cet
from .bank import dump_bank, dump_quiz_manifest, load_bank, load_bank_file, parse_bank
from .errors import (
    ManifestError,
    ParseError,
    QuizKitError,
    UnsupportedTypeError,
    ValidationError,
)
from .gift import GiftDocument, parse_gift, serialize_gift
from .grading import GradeResult, grade
from .model import (
    FeedbackCategory,
    Question,
    QuestionType,
    QuizDefinition,
    QuizMode,
    Violation,
    validate_quiz,
)
from .results import (
    OverlapRow,
    ReportRow,
    ResultStore,
    SessionSummary,
    aggregate,
    csv_bytes,
    export_csv,
    overlap_report,
)
from .session import (
    AttemptRecord,
    CetMode,
    CptMode,
    FeedbackView,
    Phase,
    SessionState,
    SubmitOutcome,
    mode_for_quiz,
    start_session,
)

__version__ = "0.1.0"

__all__ = [
    "AssemblyConfig",
    "AttemptRecord",
    "CetMode",
    "CptMode",
    "FeedbackCategory",
    "FeedbackView",
    "GiftDocument",
    "GradeResult",
    "ManifestError",
    "OverlapRow",
    "ParseError",
    "Phase",
    "Question",
    "QuestionType",
    "QuizDefinition",
    "QuizKitError",
    "QuizMode",
    "ReportRow",
    "ResultStore",
    "SessionState",
    "SessionSummary",
    "SubmitOutcome",
    "UnsupportedTypeError",
    "ValidationError",
    "Violation",
    "aggregate",
    "assemble_cet",
    "csv_bytes",
    "dump_bank",
    "dump_quiz_manifest",
    "export_csv",
    "grade",
    "load_bank",
    "load_bank_file",
    "mode_for_quiz",
    "overlap_report",
    "parse_bank",
    "parse_gift",
    "serialize_gift",
    "start_session",
    "validate_quiz",
]
