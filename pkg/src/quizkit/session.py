"""Quiz delivery state machine.

Two protocols share one engine:

- practice (CPT): untimed; after every answer in a QC1/QC2 quiz the feedback
  screen locks for a configured number of seconds and must be acknowledged
  before the next question appears; QC3 shows only the right/wrong
  notification and advances immediately.
- evaluation (CET): timed; submissions at or past the deadline are rejected
  and finalize the session; no feedback or notification of any kind is
  emitted, the correctness lives only in the stored records.

Every operation takes an explicit ``now`` timestamp (timezone-aware
datetime); the engine never reads a clock, which makes all timing rules
deterministic under test. Timestamps must be nondecreasing per session.
"""

from __future__ import annotations

import enum
import itertools
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from fractions import Fraction
from typing import Optional, Union

from .errors import (
    ClockRegressionError,
    DeadlinePassedError,
    LockActiveError,
    ModeMismatchError,
    ValidationError,
    WrongModeError,
    WrongPhaseError,
)
from .grading import GradeResult, Response, grade
from .model import FeedbackCategory, Question, QuizDefinition, QuizMode, validate_quiz


@dataclass(frozen=True)
class CptMode:
    lock_seconds: int = 10


@dataclass(frozen=True)
class CetMode:
    duration_seconds: int


SessionMode = Union[CptMode, CetMode]


class Phase(enum.Enum):
    PRESENTING = "presenting"
    FEEDBACK_LOCKED = "feedback_locked"
    FINISHED = "finished"


class FinishReason(enum.Enum):
    COMPLETED = "completed"
    DEADLINE_EXPIRED = "deadline_expired"


@dataclass(frozen=True)
class FeedbackView:
    """The locked feedback screen payload (QC1/QC2 practice only)."""

    correct: bool
    feedback_text: Optional[str]
    lock_expires_at: datetime


@dataclass(frozen=True)
class SubmitOutcome:
    """What a submission surfaces to the student.

    ``notification`` is "correct"/"incorrect" for practice sessions and None
    for evaluation sessions; ``feedback`` is present only when the session
    entered the locked feedback phase.
    """

    notification: Optional[str]
    feedback: Optional[FeedbackView]


@dataclass
class AttemptRecord:
    """Persisted per-question outcome."""

    session_id: str
    student_id: str
    quiz_code: str
    mode: str
    question_id: str
    question_type: str
    source_category: Optional[str]
    response: Response
    score: Fraction
    correct: bool
    presented_at: datetime
    answered_at: datetime
    feedback_ack_at: Optional[datetime] = None


def _require_aware(now: datetime) -> datetime:
    if now.tzinfo is None:
        raise ValueError("timestamps must be timezone-aware")
    return now


@dataclass
class SessionState:
    """One student's live attempt. Confine to a single logical owner."""

    session_id: str
    student_id: str
    quiz: QuizDefinition
    mode: SessionMode
    started_at: datetime
    phase: Phase = Phase.PRESENTING
    current_index: int = 0
    lock_expires_at: Optional[datetime] = None
    finished_reason: Optional[FinishReason] = None
    finished_at: Optional[datetime] = None
    deadline: Optional[datetime] = None
    pending_feedback: Optional[FeedbackView] = None
    records: list[AttemptRecord] = field(default_factory=list)
    last_event_at: datetime = None  # type: ignore[assignment]
    _presented_at: datetime = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.last_event_at is None:
            self.last_event_at = self.started_at
        if self._presented_at is None:
            self._presented_at = self.started_at

    # -- helpers ----------------------------------------------------------

    @property
    def is_timed(self) -> bool:
        return isinstance(self.mode, CetMode)

    @property
    def mode_label(self) -> str:
        return QuizMode.CET.value if self.is_timed else QuizMode.CPT.value

    def current_question(self) -> Question:
        if self.phase is Phase.FINISHED:
            raise WrongPhaseError("session is finished")
        return self.quiz.questions[self.current_index]

    def _check_clock(self, now: datetime) -> None:
        _require_aware(now)
        if now < self.last_event_at:
            raise ClockRegressionError(
                f"timestamp {now.isoformat()} is earlier than the last event {self.last_event_at.isoformat()}"
            )

    def _finish(self, reason: FinishReason, now: datetime) -> None:
        self.phase = Phase.FINISHED
        self.finished_reason = reason
        self.finished_at = now
        self.lock_expires_at = None

    def _advance(self, now: datetime) -> None:
        self.lock_expires_at = None
        self.pending_feedback = None
        if self.current_index + 1 >= len(self.quiz.questions):
            self.current_index += 1
            self._finish(FinishReason.COMPLETED, now)
        else:
            self.current_index += 1
            self.phase = Phase.PRESENTING
            self._presented_at = now

    def _feedback_text(self, question: Question, result: GradeResult) -> Optional[str]:
        if self.quiz.category is FeedbackCategory.QC1:
            return question.detailed_feedback
        if self.quiz.category is FeedbackCategory.QC2:
            if question.short_feedback is not None:
                return question.short_feedback
            return result.matched_short_feedback
        return None

    # -- operations --------------------------------------------------------

    def submit_answer(self, response: Response, now: datetime) -> SubmitOutcome:
        """Grade and record the current question's answer, then transition.

        In a timed session a submission at or past the deadline raises
        DeadlinePassedError, discards the answer, and finalizes the session.
        """
        self._check_clock(now)
        if self.is_timed and self.phase is not Phase.FINISHED and now >= self.deadline:
            self.last_event_at = now
            self._finish(FinishReason.DEADLINE_EXPIRED, now)
            raise DeadlinePassedError("the deadline has passed; the answer was not recorded")
        if self.phase is not Phase.PRESENTING:
            raise WrongPhaseError(f"cannot answer while {self.phase.value}")

        question = self.current_question()
        result = grade(question, response)
        record = AttemptRecord(
            session_id=self.session_id,
            student_id=self.student_id,
            quiz_code=self.quiz.code,
            mode=self.mode_label,
            question_id=question.id,
            question_type=question.type.value,
            source_category=question.source_category.value if question.source_category else None,
            response=response,
            score=result.score,
            correct=result.correct,
            presented_at=self._presented_at,
            answered_at=now,
        )
        self.records.append(record)
        self.last_event_at = now

        if self.is_timed:
            self._advance(now)
            return SubmitOutcome(notification=None, feedback=None)

        notification = "correct" if result.correct else "incorrect"
        if self.quiz.category is FeedbackCategory.QC3:
            self._advance(now)
            return SubmitOutcome(notification=notification, feedback=None)

        lock_expires = now + timedelta(seconds=self.mode.lock_seconds)
        self.phase = Phase.FEEDBACK_LOCKED
        self.lock_expires_at = lock_expires
        view = FeedbackView(
            correct=result.correct,
            feedback_text=self._feedback_text(question, result),
            lock_expires_at=lock_expires,
        )
        self.pending_feedback = view
        return SubmitOutcome(notification=notification, feedback=view)

    def acknowledge_feedback(self, now: datetime) -> None:
        """Dismiss the locked feedback screen; only allowed once the lock expired."""
        self._check_clock(now)
        if self.phase is not Phase.FEEDBACK_LOCKED:
            raise WrongPhaseError(f"no feedback to acknowledge while {self.phase.value}")
        if now < self.lock_expires_at:
            remaining = (self.lock_expires_at - now).total_seconds()
            raise LockActiveError(remaining)
        self.records[-1].feedback_ack_at = now
        self.last_event_at = now
        self._advance(now)

    def enforce_deadline(self, now: datetime) -> None:
        """Finalize a timed session once its deadline has passed. Idempotent."""
        if not self.is_timed:
            raise WrongModeError("only timed sessions have a deadline")
        if self.phase is Phase.FINISHED:
            return
        self._check_clock(now)
        self.last_event_at = now
        if now >= self.deadline:
            self._finish(FinishReason.DEADLINE_EXPIRED, now)

    def score_fraction(self) -> Fraction:
        """Exact overall score: sum of per-question scores over the question count."""
        if self.phase is not Phase.FINISHED:
            raise WrongPhaseError("session is not finished")
        total = sum((r.score for r in self.records), Fraction(0))
        return total / len(self.quiz.questions)

    def score_percent(self) -> int:
        """Reporting form: integer percent, rounded half-up."""
        return round_percent(self.score_fraction() * 100)

    def answered_count(self) -> int:
        return len(self.records)

    def lock_remaining(self, now: datetime) -> float:
        if self.phase is not Phase.FEEDBACK_LOCKED:
            return 0.0
        return max(0.0, (self.lock_expires_at - now).total_seconds())

    def deadline_remaining(self, now: datetime) -> Optional[float]:
        if not self.is_timed or self.phase is Phase.FINISHED:
            return None
        return max(0.0, (self.deadline - now).total_seconds())


def round_percent(value: Fraction) -> int:
    """Round half-up to the nearest integer (exact rational arithmetic)."""
    from math import floor

    return floor(value + Fraction(1, 2))


_session_counter = itertools.count(1)


def new_session_id() -> str:
    return f"s{next(_session_counter):06d}-{uuid.uuid4().hex[:8]}"


def start_session(
    quiz: QuizDefinition,
    mode: SessionMode,
    student_id: str,
    now: datetime,
    session_id: Optional[str] = None,
) -> SessionState:
    """Validate the quiz and open a session in the requested mode.

    The mode must agree with the quiz's default: timed quizzes are delivered
    timed, practice quizzes untimed.
    """
    _require_aware(now)
    violations = validate_quiz(quiz)
    if violations:
        raise ValidationError(violations)
    if isinstance(mode, CetMode) != (quiz.mode_default is QuizMode.CET):
        raise ModeMismatchError(
            f"quiz {quiz.code} is a {quiz.mode_default.value} quiz; requested mode does not match"
        )
    state = SessionState(
        session_id=session_id or new_session_id(),
        student_id=student_id,
        quiz=quiz,
        mode=mode,
        started_at=now,
    )
    if isinstance(mode, CetMode):
        state.deadline = now + timedelta(seconds=mode.duration_seconds)
    return state


def mode_for_quiz(quiz: QuizDefinition, lock_seconds: Optional[int] = None) -> SessionMode:
    """The natural session mode for a quiz definition."""
    if quiz.mode_default is QuizMode.CET:
        return CetMode(duration_seconds=quiz.cet_duration_seconds or 0)
    return CptMode(lock_seconds=quiz.lock_seconds if lock_seconds is None else lock_seconds)
