"""Domain model: question types, feedback categories, quizzes, and validation.

All types here are plain immutable-by-convention dataclasses. Exact numeric
fields use Decimal (authored decimal values) and Fraction (weights/credits),
never binary floats, so grading comparisons are reproducible.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Optional, Union

#: Tolerance for the "positive weights sum to 100" rule, as an exact rational.
WEIGHT_SUM_TOLERANCE = Fraction(1, 10**9)


class QuestionType(enum.Enum):
    TRUE_FALSE = "true_false"
    MULTIPLE_CHOICE = "multiple_choice"
    MULTIPLE_RESPONSE = "multiple_response"
    FILL_IN_BLANK = "fill_in_blank"
    MATCHING = "matching"
    NUMERIC_RANGE = "numeric_range"
    HOTSPOT = "hotspot"


class FeedbackCategory(enum.Enum):
    """Feedback tier of a quiz.

    QC1 shows a detailed explanation after every answer, QC2 a short one,
    QC3 only the right/wrong notification.
    """

    QC1 = "QC1"
    QC2 = "QC2"
    QC3 = "QC3"


class QuizMode(enum.Enum):
    """Delivery protocol: untimed practice (CPT) or timed evaluation (CET)."""

    CPT = "CPT"
    CET = "CET"


# ---------------------------------------------------------------------------
# Answer specifications (tagged union keyed by QuestionType)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrueFalseSpec:
    correct: bool
    # Feedback shown when the response was wrong / right (GIFT's {T#wrong#right}).
    feedback_wrong: Optional[str] = None
    feedback_right: Optional[str] = None


@dataclass(frozen=True)
class ChoiceOption:
    text: str
    is_correct: bool = False
    short_feedback: Optional[str] = None


@dataclass(frozen=True)
class MultipleChoiceSpec:
    options: tuple[ChoiceOption, ...]


@dataclass(frozen=True)
class ResponseOption:
    text: str
    weight_percent: Fraction
    short_feedback: Optional[str] = None


@dataclass(frozen=True)
class MultipleResponseSpec:
    options: tuple[ResponseOption, ...]


@dataclass(frozen=True)
class AcceptedAnswer:
    text: str
    weight_percent: Fraction = Fraction(100)
    short_feedback: Optional[str] = None


@dataclass(frozen=True)
class FillInBlankSpec:
    accepted: tuple[AcceptedAnswer, ...]


@dataclass(frozen=True)
class MatchPair:
    left: str
    right: str


@dataclass(frozen=True)
class MatchingSpec:
    pairs: tuple[MatchPair, ...]


@dataclass(frozen=True)
class NumericInterval:
    """One accepted numeric interval: either target±tolerance or [low, high].

    Exactly one of the two forms is populated. Boundaries are inclusive.
    """

    target: Optional[Decimal] = None
    tolerance: Optional[Decimal] = None
    low: Optional[Decimal] = None
    high: Optional[Decimal] = None
    credit: Fraction = Fraction(1)
    short_feedback: Optional[str] = None

    def is_target_form(self) -> bool:
        return self.target is not None

    def contains(self, value: Decimal) -> bool:
        if self.target is not None:
            return abs(value - self.target) <= (self.tolerance or Decimal(0))
        return self.low <= value <= self.high  # type: ignore[operator]


@dataclass(frozen=True)
class NumericRangeSpec:
    intervals: tuple[NumericInterval, ...]


@dataclass(frozen=True)
class Rect:
    x: Decimal
    y: Decimal
    w: Decimal
    h: Decimal


@dataclass(frozen=True)
class Circle:
    cx: Decimal
    cy: Decimal
    r: Decimal


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[tuple[Decimal, Decimal], ...]


Shape = Union[Rect, Circle, Polygon]


@dataclass(frozen=True)
class HotspotRegion:
    shape: Shape
    credit: Fraction = Fraction(1)
    short_feedback: Optional[str] = None


@dataclass(frozen=True)
class HotspotSpec:
    """Click-target question: regions in normalized [0,1]^2 image coordinates."""

    image_ref: str
    regions: tuple[HotspotRegion, ...]


AnswerSpec = Union[
    TrueFalseSpec,
    MultipleChoiceSpec,
    MultipleResponseSpec,
    FillInBlankSpec,
    MatchingSpec,
    NumericRangeSpec,
    HotspotSpec,
]

_SPEC_TYPES: dict[QuestionType, type] = {
    QuestionType.TRUE_FALSE: TrueFalseSpec,
    QuestionType.MULTIPLE_CHOICE: MultipleChoiceSpec,
    QuestionType.MULTIPLE_RESPONSE: MultipleResponseSpec,
    QuestionType.FILL_IN_BLANK: FillInBlankSpec,
    QuestionType.MATCHING: MatchingSpec,
    QuestionType.NUMERIC_RANGE: NumericRangeSpec,
    QuestionType.HOTSPOT: HotspotSpec,
}


def spec_question_type(spec: AnswerSpec) -> QuestionType:
    for qtype, cls in _SPEC_TYPES.items():
        if isinstance(spec, cls):
            return qtype
    raise TypeError(f"not an answer spec: {spec!r}")


# ---------------------------------------------------------------------------
# Question and quiz
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Question:
    """One assessment item.

    ``source_category`` records which practice pool the question was drawn
    from when it entered an evaluation test; it stays None for questions
    authored directly. ``stem_format`` preserves an authored format tag
    (html/markdown/plain/moodle) verbatim, never interpreted.
    """

    id: str
    type: QuestionType
    stem: str
    spec: AnswerSpec
    detailed_feedback: Optional[str] = None
    short_feedback: Optional[str] = None
    topic: str = ""
    source_category: Optional[FeedbackCategory] = None
    stem_format: Optional[str] = None


@dataclass(frozen=True)
class QuizDefinition:
    """An ordered question list plus delivery metadata.

    ``category`` controls feedback display in practice mode and which
    feedback texts must be present on every question. ``lock_seconds`` is
    the mandatory feedback-review lock used for QC1/QC2 practice sessions.
    """

    code: str
    subject: str
    topic: str
    category: FeedbackCategory
    mode_default: QuizMode
    questions: tuple[Question, ...]
    cet_duration_seconds: Optional[int] = None
    lock_seconds: int = 10


@dataclass(frozen=True)
class Violation:
    """One broken invariant, named by question id (None for quiz-level rules)."""

    question_id: Optional[str]
    rule: str
    message: str

    def __str__(self) -> str:
        where = self.question_id or "<quiz>"
        return f"{where}: {self.message}"


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


def _has_any_answer_feedback(q: Question) -> bool:
    """True when at least one per-answer feedback text exists on the answer spec."""
    spec = q.spec
    if isinstance(spec, TrueFalseSpec):
        return spec.feedback_wrong is not None or spec.feedback_right is not None
    if isinstance(spec, (MultipleChoiceSpec, MultipleResponseSpec)):
        return any(o.short_feedback is not None for o in spec.options)
    if isinstance(spec, FillInBlankSpec):
        return any(a.short_feedback is not None for a in spec.accepted)
    if isinstance(spec, NumericRangeSpec):
        return any(i.short_feedback is not None for i in spec.intervals)
    if isinstance(spec, HotspotSpec):
        return any(r.short_feedback is not None for r in spec.regions)
    return False


def _in_unit(x: Decimal) -> bool:
    return Decimal(0) <= x <= Decimal(1)


def _validate_spec(q: Question, out: list[Violation]) -> None:
    spec = q.spec
    qid = q.id

    if isinstance(spec, MultipleChoiceSpec):
        if len(spec.options) < 2:
            out.append(Violation(qid, "too_few_options", f"multiple choice needs >= 2 options, has {len(spec.options)}"))
        n_correct = sum(1 for o in spec.options if o.is_correct)
        if n_correct != 1:
            out.append(Violation(qid, "correct_count", f"multiple choice needs exactly 1 correct option, has {n_correct}"))
    elif isinstance(spec, MultipleResponseSpec):
        if not spec.options:
            out.append(Violation(qid, "no_options", "multiple response has no options"))
        for o in spec.options:
            if not (Fraction(-100) <= o.weight_percent <= Fraction(100)):
                out.append(Violation(qid, "weight_range", f"weight {o.weight_percent} outside [-100, 100]"))
        positive = sum((o.weight_percent for o in spec.options if o.weight_percent > 0), Fraction(0))
        if spec.options and abs(positive - 100) > WEIGHT_SUM_TOLERANCE:
            out.append(Violation(qid, "weight_sum", f"positive weights sum {_fmt_frac(positive)} != 100"))
    elif isinstance(spec, FillInBlankSpec):
        if not spec.accepted:
            out.append(Violation(qid, "no_accepted", "fill-in has no accepted answers"))
        for a in spec.accepted:
            if not (Fraction(0) < a.weight_percent <= Fraction(100)):
                out.append(Violation(qid, "weight_range", f"weight {_fmt_frac(a.weight_percent)} outside (0, 100]"))
        if spec.accepted and not any(a.weight_percent == 100 for a in spec.accepted):
            out.append(Violation(qid, "no_full_credit", "no accepted answer carries weight 100"))
    elif isinstance(spec, MatchingSpec):
        if len(spec.pairs) < 2:
            out.append(Violation(qid, "too_few_pairs", f"matching needs >= 2 pairs, has {len(spec.pairs)}"))
        seen: set[str] = set()
        for p in spec.pairs:
            if p.left in seen:
                out.append(Violation(qid, "duplicate_left", f"duplicate left side {p.left!r}"))
            seen.add(p.left)
    elif isinstance(spec, NumericRangeSpec):
        if not spec.intervals:
            out.append(Violation(qid, "no_intervals", "numeric question has no intervals"))
        for iv in spec.intervals:
            target_form = iv.target is not None or iv.tolerance is not None
            range_form = iv.low is not None or iv.high is not None
            if target_form and range_form:
                out.append(Violation(qid, "bad_interval", "interval mixes target and low/high forms"))
            elif target_form:
                if iv.target is None or iv.tolerance is None or iv.tolerance < 0:
                    out.append(Violation(qid, "bad_interval", "target form needs target and tolerance >= 0"))
            elif range_form:
                if iv.low is None or iv.high is None or iv.low > iv.high:
                    out.append(Violation(qid, "bad_interval", "range form needs low <= high"))
            else:
                out.append(Violation(qid, "bad_interval", "empty interval"))
            if not (Fraction(0) < iv.credit <= Fraction(1)):
                out.append(Violation(qid, "credit_range", f"credit {_fmt_frac(iv.credit)} outside (0, 1]"))
        if spec.intervals and not any(iv.credit == 1 for iv in spec.intervals):
            out.append(Violation(qid, "no_full_credit", "no interval carries full credit"))
    elif isinstance(spec, HotspotSpec):
        if not spec.regions:
            out.append(Violation(qid, "no_regions", "hotspot has no regions"))
        for region in spec.regions:
            shape = region.shape
            if isinstance(shape, Rect):
                ok = (
                    shape.w >= 0 and shape.h >= 0
                    and _in_unit(shape.x) and _in_unit(shape.y)
                    and _in_unit(shape.x + shape.w) and _in_unit(shape.y + shape.h)
                )
            elif isinstance(shape, Circle):
                ok = (
                    shape.r >= 0
                    and _in_unit(shape.cx - shape.r) and _in_unit(shape.cx + shape.r)
                    and _in_unit(shape.cy - shape.r) and _in_unit(shape.cy + shape.r)
                )
            else:
                ok = all(_in_unit(vx) and _in_unit(vy) for vx, vy in shape.vertices) and len(shape.vertices) >= 3
            if not ok:
                out.append(Violation(qid, "region_bounds", "region outside the unit square or malformed"))
            if not (Fraction(0) < region.credit <= Fraction(1)):
                out.append(Violation(qid, "credit_range", f"credit {_fmt_frac(region.credit)} outside (0, 1]"))
        if spec.regions and not any(r.credit == 1 for r in spec.regions):
            out.append(Violation(qid, "no_full_credit", "no region carries full credit"))


def _fmt_frac(f: Fraction) -> str:
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


def validate_quiz(quiz: QuizDefinition) -> list[Violation]:
    """Check every invariant; returns an empty list iff the quiz is valid.

    Deterministic and order-stable: quiz-level rules first, then questions
    in order, each checked against a fixed rule sequence.
    """
    out: list[Violation] = []

    if not quiz.questions:
        out.append(Violation(None, "empty_quiz", "quiz has no questions"))
    if quiz.mode_default is QuizMode.CET and not (quiz.cet_duration_seconds and quiz.cet_duration_seconds > 0):
        out.append(Violation(None, "missing_cet_duration", "timed quiz needs a positive duration"))
    if quiz.lock_seconds < 0:
        out.append(Violation(None, "bad_lock_seconds", "lock_seconds must be nonnegative"))

    seen_ids: set[str] = set()
    for q in quiz.questions:
        if not q.id:
            out.append(Violation(q.id, "empty_id", "question id is empty"))
        elif q.id in seen_ids:
            out.append(Violation(q.id, "duplicate_id", f"duplicate question id {q.id!r}"))
        seen_ids.add(q.id)

        expected = _SPEC_TYPES[q.type]
        if not isinstance(q.spec, expected):
            out.append(Violation(q.id, "spec_type", f"spec {type(q.spec).__name__} does not match type {q.type.value}"))
            continue

        if quiz.category is FeedbackCategory.QC1 and q.detailed_feedback is None:
            out.append(Violation(q.id, "missing_detailed_feedback", "missing detailed feedback"))
        if quiz.category is FeedbackCategory.QC2 and q.short_feedback is None and not _has_any_answer_feedback(q):
            out.append(Violation(q.id, "missing_short_feedback", "missing short feedback"))

        _validate_spec(q, out)

    return out
