"""Deterministic per-type grading of responses against answer specs.

Scores are exact rationals in [0, 1]; ``correct`` means exactly full credit.
The matched answer's per-option feedback (when a single match exists) rides
along so short-feedback sessions can display it.

Response shapes by question type:

- true/false: ``bool``
- multiple choice: ``int`` option index
- multiple response: iterable of ``int`` option indices
- fill in blank: ``str``
- matching: ``dict`` mapping left text to chosen right text
- numeric: ``Decimal``, ``int`` or decimal string (floats are converted via
  their shortest decimal representation)
- hotspot: ``(x, y)`` pair of numbers in [0, 1]
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Optional, Union

from .errors import OptionIndexError, TypeMismatchError
from .model import (
    Circle,
    FillInBlankSpec,
    HotspotSpec,
    MatchingSpec,
    MultipleChoiceSpec,
    MultipleResponseSpec,
    NumericRangeSpec,
    Polygon,
    Question,
    QuestionType,
    Rect,
    TrueFalseSpec,
)

Response = Union[bool, int, frozenset, str, dict, Decimal, tuple]

_WS = " \t\r\n\f\v"


@dataclass(frozen=True)
class GradeResult:
    score: Fraction
    correct: bool
    matched_short_feedback: Optional[str] = None


def _clamp01(x: Fraction) -> Fraction:
    return max(Fraction(0), min(Fraction(1), x))


def _to_decimal(value, qid: str) -> Decimal:
    if isinstance(value, bool):
        raise TypeMismatchError(f"{qid}: expected a number, got a boolean")
    if isinstance(value, Decimal):
        return value
    if isinstance(value, int):
        return Decimal(value)
    if isinstance(value, float):
        return Decimal(repr(value))
    if isinstance(value, str):
        try:
            d = Decimal(value.strip())
        except InvalidOperation:
            raise TypeMismatchError(f"{qid}: {value!r} is not a number")
        if not d.is_finite():
            raise TypeMismatchError(f"{qid}: {value!r} is not a finite number")
        return d
    raise TypeMismatchError(f"{qid}: expected a number, got {type(value).__name__}")


def _to_coord(value, qid: str) -> Fraction:
    return Fraction(_to_decimal(value, qid))


def normalize_text(text: str) -> str:
    """Fill-in comparison key: ASCII-whitespace trimmed, case-folded."""
    return text.strip(_WS).casefold()


def _point_in_shape(shape, px: Fraction, py: Fraction) -> bool:
    # All boundaries are inclusive.
    if isinstance(shape, Rect):
        x, y = Fraction(shape.x), Fraction(shape.y)
        return x <= px <= x + Fraction(shape.w) and y <= py <= y + Fraction(shape.h)
    if isinstance(shape, Circle):
        dx = px - Fraction(shape.cx)
        dy = py - Fraction(shape.cy)
        return dx * dx + dy * dy <= Fraction(shape.r) ** 2
    if isinstance(shape, Polygon):
        verts = [(Fraction(vx), Fraction(vy)) for vx, vy in shape.vertices]
        n = len(verts)
        # On-edge check first, then even-odd ray casting.
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
            if cross == 0 and min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by):
                return True
        inside = False
        for i in range(n):
            ax, ay = verts[i]
            bx, by = verts[(i + 1) % n]
            if (ay > py) != (by > py):
                x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
                if px < x_cross:
                    inside = not inside
        return inside
    raise TypeError(f"unknown shape {shape!r}")


def _grade_true_false(spec: TrueFalseSpec, response, qid: str) -> GradeResult:
    if not isinstance(response, bool):
        raise TypeMismatchError(f"{qid}: true/false answer must be a boolean")
    right = response is spec.correct
    feedback = spec.feedback_right if right else spec.feedback_wrong
    return GradeResult(Fraction(1 if right else 0), right, feedback)


def _check_index(i, count: int, qid: str) -> int:
    if isinstance(i, bool) or not isinstance(i, int):
        raise TypeMismatchError(f"{qid}: option index must be an integer")
    if not 0 <= i < count:
        raise OptionIndexError(f"{qid}: option index {i} out of range [0, {count})")
    return i


def _grade_multiple_choice(spec: MultipleChoiceSpec, response, qid: str) -> GradeResult:
    i = _check_index(response, len(spec.options), qid)
    option = spec.options[i]
    score = Fraction(1 if option.is_correct else 0)
    return GradeResult(score, option.is_correct, option.short_feedback)


def _grade_multiple_response(spec: MultipleResponseSpec, response, qid: str) -> GradeResult:
    if isinstance(response, (str, bytes)) or not hasattr(response, "__iter__"):
        raise TypeMismatchError(f"{qid}: multiple response answer must be a set of indices")
    chosen = frozenset(_check_index(i, len(spec.options), qid) for i in response)
    total = sum((spec.options[i].weight_percent for i in chosen), Fraction(0))
    score = _clamp01(total / 100)
    feedback = None
    if len(chosen) == 1:
        feedback = spec.options[next(iter(chosen))].short_feedback
    return GradeResult(score, score == 1, feedback)


def _grade_fill_in(spec: FillInBlankSpec, response, qid: str) -> GradeResult:
    if not isinstance(response, str):
        raise TypeMismatchError(f"{qid}: fill-in answer must be text")
    key = normalize_text(response)
    best = None
    for a in spec.accepted:
        if normalize_text(a.text) == key and (best is None or a.weight_percent > best.weight_percent):
            best = a
    if best is None:
        return GradeResult(Fraction(0), False, None)
    score = _clamp01(best.weight_percent / 100)
    return GradeResult(score, score == 1, best.short_feedback)


def _grade_matching(spec: MatchingSpec, response, qid: str) -> GradeResult:
    if not isinstance(response, dict):
        raise TypeMismatchError(f"{qid}: matching answer must map left texts to right texts")
    hits = sum(1 for p in spec.pairs if response.get(p.left) == p.right)
    score = Fraction(hits, len(spec.pairs)) if spec.pairs else Fraction(0)
    return GradeResult(score, score == 1, None)


def _grade_numeric(spec: NumericRangeSpec, response, qid: str) -> GradeResult:
    value = _to_decimal(response, qid)
    best = None
    for iv in spec.intervals:
        if iv.contains(value) and (best is None or iv.credit > best.credit):
            best = iv
    if best is None:
        return GradeResult(Fraction(0), False, None)
    score = _clamp01(best.credit)
    return GradeResult(score, score == 1, best.short_feedback)


def _grade_hotspot(spec: HotspotSpec, response, qid: str) -> GradeResult:
    if not isinstance(response, (tuple, list)) or len(response) != 2:
        raise TypeMismatchError(f"{qid}: hotspot answer must be an (x, y) pair")
    px = _to_coord(response[0], qid)
    py = _to_coord(response[1], qid)
    best = None
    for region in spec.regions:
        if _point_in_shape(region.shape, px, py) and (best is None or region.credit > best.credit):
            best = region
    if best is None:
        return GradeResult(Fraction(0), False, None)
    score = _clamp01(best.credit)
    return GradeResult(score, score == 1, best.short_feedback)


_GRADERS = {
    QuestionType.TRUE_FALSE: _grade_true_false,
    QuestionType.MULTIPLE_CHOICE: _grade_multiple_choice,
    QuestionType.MULTIPLE_RESPONSE: _grade_multiple_response,
    QuestionType.FILL_IN_BLANK: _grade_fill_in,
    QuestionType.MATCHING: _grade_matching,
    QuestionType.NUMERIC_RANGE: _grade_numeric,
    QuestionType.HOTSPOT: _grade_hotspot,
}


def grade(question: Question, response: Response) -> GradeResult:
    """Grade one response. Raises TypeMismatchError / OptionIndexError on bad input."""
    grader = _GRADERS[question.type]
    return grader(question.spec, response, question.id)
