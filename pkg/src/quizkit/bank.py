"""Native bank format (JSON, all seven question types) and quiz manifests.

The native format is the superset carrier: GIFT stays authoritative for the
six text-expressible types, while hotspot questions and assembled evaluation
tests (which need provenance metadata) are written natively.

Exact numeric fields (targets, tolerances, coordinates, weights, credits)
are carried as JSON strings or numbers; numbers are decoded with
``parse_float=Decimal`` so no value ever passes through a binary float.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from .errors import ManifestError, ParseError, ValidationError
from .gift import parse_gift
from .model import (
    AcceptedAnswer,
    AnswerSpec,
    ChoiceOption,
    Circle,
    FeedbackCategory,
    FillInBlankSpec,
    HotspotRegion,
    HotspotSpec,
    MatchPair,
    MatchingSpec,
    MultipleChoiceSpec,
    MultipleResponseSpec,
    NumericInterval,
    NumericRangeSpec,
    Polygon,
    Question,
    QuestionType,
    QuizDefinition,
    QuizMode,
    Rect,
    ResponseOption,
    Shape,
    TrueFalseSpec,
    validate_quiz,
)

DEFAULT_LOCK_SECONDS = 10


# ---------------------------------------------------------------------------
# Exact number encoding
# ---------------------------------------------------------------------------


def _as_decimal(value: Any, where: str) -> Decimal:
    if isinstance(value, Decimal):
        return value
    if isinstance(value, bool) or value is None:
        raise ManifestError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, int):
        return Decimal(value)
    if isinstance(value, float):
        # JSON decoding uses parse_float=Decimal; bare floats only appear in
        # programmatic input and convert via their shortest repr.
        return Decimal(repr(value))
    if isinstance(value, str):
        try:
            return Decimal(value)
        except InvalidOperation:
            raise ManifestError(f"{where}: {value!r} is not a decimal number")
    raise ManifestError(f"{where}: expected a number, got {type(value).__name__}")


def _as_fraction(value: Any, where: str) -> Fraction:
    if isinstance(value, str) and "/" in value:
        num, _, den = value.partition("/")
        try:
            return Fraction(int(num), int(den))
        except (ValueError, ZeroDivisionError):
            raise ManifestError(f"{where}: {value!r} is not a fraction")
    return Fraction(_as_decimal(value, where))


def _decimal_str(d: Decimal) -> str:
    return format(d, "f")


def _fraction_str(f: Fraction) -> str:
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


# ---------------------------------------------------------------------------
# Question <-> JSON object
# ---------------------------------------------------------------------------


def _spec_to_obj(spec: AnswerSpec) -> dict:
    if isinstance(spec, TrueFalseSpec):
        obj: dict[str, Any] = {"correct": spec.correct}
        if spec.feedback_wrong is not None:
            obj["feedback_wrong"] = spec.feedback_wrong
        if spec.feedback_right is not None:
            obj["feedback_right"] = spec.feedback_right
        return obj
    if isinstance(spec, MultipleChoiceSpec):
        return {
            "options": [
                _drop_none({"text": o.text, "is_correct": o.is_correct, "short_feedback": o.short_feedback})
                for o in spec.options
            ]
        }
    if isinstance(spec, MultipleResponseSpec):
        return {
            "options": [
                _drop_none(
                    {
                        "text": o.text,
                        "weight_percent": _fraction_str(o.weight_percent),
                        "short_feedback": o.short_feedback,
                    }
                )
                for o in spec.options
            ]
        }
    if isinstance(spec, FillInBlankSpec):
        return {
            "accepted": [
                _drop_none(
                    {
                        "text": a.text,
                        "weight_percent": _fraction_str(a.weight_percent),
                        "short_feedback": a.short_feedback,
                    }
                )
                for a in spec.accepted
            ]
        }
    if isinstance(spec, MatchingSpec):
        return {"pairs": [{"left": p.left, "right": p.right} for p in spec.pairs]}
    if isinstance(spec, NumericRangeSpec):
        intervals = []
        for iv in spec.intervals:
            obj = {}
            if iv.is_target_form():
                obj["target"] = _decimal_str(iv.target)
                obj["tolerance"] = _decimal_str(iv.tolerance)
            else:
                obj["low"] = _decimal_str(iv.low)
                obj["high"] = _decimal_str(iv.high)
            obj["credit"] = _fraction_str(iv.credit)
            if iv.short_feedback is not None:
                obj["short_feedback"] = iv.short_feedback
            intervals.append(obj)
        return {"intervals": intervals}
    if isinstance(spec, HotspotSpec):
        regions = []
        for r in spec.regions:
            shape = r.shape
            if isinstance(shape, Rect):
                shape_obj = {
                    "kind": "rect",
                    "x": _decimal_str(shape.x),
                    "y": _decimal_str(shape.y),
                    "w": _decimal_str(shape.w),
                    "h": _decimal_str(shape.h),
                }
            elif isinstance(shape, Circle):
                shape_obj = {
                    "kind": "circle",
                    "cx": _decimal_str(shape.cx),
                    "cy": _decimal_str(shape.cy),
                    "r": _decimal_str(shape.r),
                }
            else:
                shape_obj = {
                    "kind": "polygon",
                    "vertices": [[_decimal_str(vx), _decimal_str(vy)] for vx, vy in shape.vertices],
                }
            regions.append(
                _drop_none(
                    {"shape": shape_obj, "credit": _fraction_str(r.credit), "short_feedback": r.short_feedback}
                )
            )
        return {"image_ref": spec.image_ref, "regions": regions}
    raise TypeError(f"unknown spec {spec!r}")


def _drop_none(obj: dict) -> dict:
    return {k: v for k, v in obj.items() if v is not None}


def question_to_obj(q: Question) -> dict:
    obj = {
        "id": q.id,
        "type": q.type.value,
        "stem": q.stem,
        "spec": _spec_to_obj(q.spec),
        "detailed_feedback": q.detailed_feedback,
        "short_feedback": q.short_feedback,
        "topic": q.topic,
    }
    if q.source_category is not None:
        obj["source_category"] = q.source_category.value
    if q.stem_format is not None:
        obj["stem_format"] = q.stem_format
    return obj


def _require(obj: dict, key: str, where: str) -> Any:
    if key not in obj:
        raise ManifestError(f"{where}: missing required key {key!r}")
    return obj[key]


def _spec_from_obj(qtype: QuestionType, obj: Any, where: str) -> AnswerSpec:
    if not isinstance(obj, dict):
        raise ManifestError(f"{where}: spec must be an object")
    if qtype is QuestionType.TRUE_FALSE:
        correct = _require(obj, "correct", where)
        if not isinstance(correct, bool):
            raise ManifestError(f"{where}: correct must be a boolean")
        return TrueFalseSpec(
            correct=correct,
            feedback_wrong=obj.get("feedback_wrong"),
            feedback_right=obj.get("feedback_right"),
        )
    if qtype is QuestionType.MULTIPLE_CHOICE:
        options = tuple(
            ChoiceOption(
                text=str(_require(o, "text", where)),
                is_correct=bool(o.get("is_correct", False)),
                short_feedback=o.get("short_feedback"),
            )
            for o in _require(obj, "options", where)
        )
        return MultipleChoiceSpec(options)
    if qtype is QuestionType.MULTIPLE_RESPONSE:
        options = tuple(
            ResponseOption(
                text=str(_require(o, "text", where)),
                weight_percent=_as_fraction(_require(o, "weight_percent", where), where),
                short_feedback=o.get("short_feedback"),
            )
            for o in _require(obj, "options", where)
        )
        return MultipleResponseSpec(options)
    if qtype is QuestionType.FILL_IN_BLANK:
        accepted = tuple(
            AcceptedAnswer(
                text=str(_require(a, "text", where)),
                weight_percent=_as_fraction(a.get("weight_percent", 100), where),
                short_feedback=a.get("short_feedback"),
            )
            for a in _require(obj, "accepted", where)
        )
        return FillInBlankSpec(accepted)
    if qtype is QuestionType.MATCHING:
        pairs = tuple(
            MatchPair(left=str(_require(p, "left", where)), right=str(_require(p, "right", where)))
            for p in _require(obj, "pairs", where)
        )
        return MatchingSpec(pairs)
    if qtype is QuestionType.NUMERIC_RANGE:
        intervals = []
        for iv in _require(obj, "intervals", where):
            if "target" in iv or "tolerance" in iv:
                interval = NumericInterval(
                    target=_as_decimal(_require(iv, "target", where), where),
                    tolerance=_as_decimal(iv.get("tolerance", 0), where),
                    credit=_as_fraction(iv.get("credit", 1), where),
                    short_feedback=iv.get("short_feedback"),
                )
            else:
                interval = NumericInterval(
                    low=_as_decimal(_require(iv, "low", where), where),
                    high=_as_decimal(_require(iv, "high", where), where),
                    credit=_as_fraction(iv.get("credit", 1), where),
                    short_feedback=iv.get("short_feedback"),
                )
            intervals.append(interval)
        return NumericRangeSpec(tuple(intervals))
    if qtype is QuestionType.HOTSPOT:
        regions = []
        for r in _require(obj, "regions", where):
            shape_obj = _require(r, "shape", where)
            kind = _require(shape_obj, "kind", where)
            shape: Shape
            if kind == "rect":
                shape = Rect(
                    x=_as_decimal(_require(shape_obj, "x", where), where),
                    y=_as_decimal(_require(shape_obj, "y", where), where),
                    w=_as_decimal(_require(shape_obj, "w", where), where),
                    h=_as_decimal(_require(shape_obj, "h", where), where),
                )
            elif kind == "circle":
                shape = Circle(
                    cx=_as_decimal(_require(shape_obj, "cx", where), where),
                    cy=_as_decimal(_require(shape_obj, "cy", where), where),
                    r=_as_decimal(_require(shape_obj, "r", where), where),
                )
            elif kind == "polygon":
                shape = Polygon(
                    tuple(
                        (_as_decimal(v[0], where), _as_decimal(v[1], where))
                        for v in _require(shape_obj, "vertices", where)
                    )
                )
            else:
                raise ManifestError(f"{where}: unknown shape kind {kind!r}")
            regions.append(
                HotspotRegion(
                    shape=shape,
                    credit=_as_fraction(r.get("credit", 1), where),
                    short_feedback=r.get("short_feedback"),
                )
            )
        return HotspotSpec(image_ref=str(_require(obj, "image_ref", where)), regions=tuple(regions))
    raise ManifestError(f"{where}: unknown question type {qtype!r}")


def question_from_obj(obj: Any, where: str = "question") -> Question:
    if not isinstance(obj, dict):
        raise ManifestError(f"{where}: expected an object")
    qid = str(_require(obj, "id", where))
    where = f"{where} {qid!r}"
    type_value = _require(obj, "type", where)
    try:
        qtype = QuestionType(type_value)
    except ValueError:
        raise ManifestError(f"{where}: unknown question type {type_value!r}")
    source_category = None
    if obj.get("source_category") is not None:
        try:
            source_category = FeedbackCategory(obj["source_category"])
        except ValueError:
            raise ManifestError(f"{where}: unknown source_category {obj['source_category']!r}")
    return Question(
        id=qid,
        type=qtype,
        stem=str(_require(obj, "stem", where)),
        spec=_spec_from_obj(qtype, _require(obj, "spec", where), where),
        detailed_feedback=obj.get("detailed_feedback"),
        short_feedback=obj.get("short_feedback"),
        topic=str(obj.get("topic", "")),
        source_category=source_category,
        stem_format=obj.get("stem_format"),
    )


# ---------------------------------------------------------------------------
# Native bank files: {"questions": [...]}
# ---------------------------------------------------------------------------


def parse_bank(text: str, where: str = "bank") -> list[Question]:
    try:
        data = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as err:
        raise ManifestError(f"{where}: invalid JSON: {err}")
    if not isinstance(data, dict) or "questions" not in data:
        raise ManifestError(f'{where}: expected an object with a "questions" array')
    return [question_from_obj(o, where) for o in data["questions"]]


def dump_bank(questions: list[Question]) -> str:
    return json.dumps({"questions": [question_to_obj(q) for q in questions]}, indent=2) + "\n"


def load_bank_file(path: Path | str) -> list[Question]:
    path = Path(path)
    return parse_bank(path.read_text(encoding="utf-8"), where=str(path))


# ---------------------------------------------------------------------------
# Manifests
# ---------------------------------------------------------------------------

_MANIFEST_REQUIRED = ("code", "subject", "topic", "category", "mode", "gift")


@dataclass(frozen=True)
class Manifest:
    """Parsed manifest: quiz metadata plus resolved question sources."""

    code: str
    subject: str
    topic: str
    category: FeedbackCategory
    mode: QuizMode
    gift_paths: tuple[str, ...]
    cet_duration_seconds: Optional[int]
    lock_seconds: int
    bank_paths: tuple[str, ...]
    inline_questions: tuple[Question, ...]
    hotspot_questions: tuple[Question, ...]
    assembly: Optional[dict]


def parse_manifest(data: Any, where: str = "manifest") -> Manifest:
    if not isinstance(data, dict):
        raise ManifestError(f"{where}: expected a JSON object")
    for key in _MANIFEST_REQUIRED:
        if key not in data:
            raise ManifestError(f"{where}: missing required key {key!r}")
    try:
        category = FeedbackCategory(data["category"])
    except ValueError:
        raise ManifestError(f"{where}: category must be QC1, QC2 or QC3")
    try:
        mode = QuizMode(data["mode"])
    except ValueError:
        raise ManifestError(f"{where}: mode must be CPT or CET")

    duration = data.get("cet_duration_seconds")
    if mode is QuizMode.CET:
        if not isinstance(duration, int) or isinstance(duration, bool) or duration <= 0:
            raise ManifestError(f"{where}: cet_duration_seconds must be a positive integer for CET quizzes")
    elif duration is not None and (not isinstance(duration, int) or duration <= 0):
        raise ManifestError(f"{where}: cet_duration_seconds must be a positive integer")

    lock_seconds = data.get("lock_seconds", DEFAULT_LOCK_SECONDS)
    if not isinstance(lock_seconds, int) or isinstance(lock_seconds, bool) or lock_seconds < 0:
        raise ManifestError(f"{where}: lock_seconds must be a nonnegative integer")

    gift = data["gift"]
    if not isinstance(gift, list) or not all(isinstance(p, str) for p in gift):
        raise ManifestError(f"{where}: gift must be an array of relative paths")
    banks = data.get("banks", [])
    if not isinstance(banks, list) or not all(isinstance(p, str) for p in banks):
        raise ManifestError(f"{where}: banks must be an array of relative paths")

    inline = tuple(question_from_obj(o, f"{where} questions") for o in data.get("questions", []))
    hotspot = tuple(question_from_obj(o, f"{where} hotspot") for o in data.get("hotspot", []))
    for q in hotspot:
        if q.type is not QuestionType.HOTSPOT:
            raise ManifestError(f"{where}: hotspot entry {q.id!r} has type {q.type.value}")

    return Manifest(
        code=str(data["code"]),
        subject=str(data["subject"]),
        topic=str(data["topic"]),
        category=category,
        mode=mode,
        gift_paths=tuple(gift),
        cet_duration_seconds=duration,
        lock_seconds=lock_seconds,
        bank_paths=tuple(banks),
        inline_questions=inline,
        hotspot_questions=hotspot,
        assembly=data.get("assembly"),
    )


def _quiz_from_manifest(manifest: Manifest, questions: list[Question]) -> QuizDefinition:
    tagged = [
        q if q.topic else dataclasses.replace(q, topic=manifest.topic)
        for q in questions
    ]
    quiz = QuizDefinition(
        code=manifest.code,
        subject=manifest.subject,
        topic=manifest.topic,
        category=manifest.category,
        mode_default=manifest.mode,
        questions=tuple(tagged),
        cet_duration_seconds=manifest.cet_duration_seconds,
        lock_seconds=manifest.lock_seconds,
    )
    violations = validate_quiz(quiz)
    if violations:
        raise ValidationError(violations)
    return quiz


def load_manifest_data(data: Any, base_dir: Path | str, where: str = "manifest") -> QuizDefinition:
    """Build and validate a quiz from already-decoded manifest JSON.

    GIFT and bank paths resolve relative to ``base_dir``. Question order is
    deterministic: gift files as listed, then bank files, then inline
    questions, then hotspot entries.
    """
    manifest = parse_manifest(data, where)
    base = Path(base_dir)
    questions: list[Question] = []
    for rel in manifest.gift_paths:
        path = base / rel
        if not path.is_file():
            raise FileNotFoundError(f"{where}: gift file not found: {path}")
        try:
            doc = parse_gift(path.read_text(encoding="utf-8"))
        except ParseError as err:
            raise err.with_filename(str(path))
        questions.extend(doc.questions)
    for rel in manifest.bank_paths:
        path = base / rel
        if not path.is_file():
            raise FileNotFoundError(f"{where}: bank file not found: {path}")
        questions.extend(load_bank_file(path))
    questions.extend(manifest.inline_questions)
    questions.extend(manifest.hotspot_questions)
    return _quiz_from_manifest(manifest, questions)


def load_bank(path: Path | str) -> QuizDefinition:
    """Load a quiz from a manifest file, resolving references and validating."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    try:
        data = json.loads(path.read_text(encoding="utf-8"), parse_float=Decimal)
    except json.JSONDecodeError as err:
        raise ManifestError(f"{path}: invalid JSON: {err}")
    return load_manifest_data(data, base_dir=path.parent, where=str(path))


def dump_quiz_manifest(quiz: QuizDefinition) -> str:
    """Render a quiz as a self-contained manifest with inline questions."""
    data: dict[str, Any] = {
        "code": quiz.code,
        "subject": quiz.subject,
        "topic": quiz.topic,
        "category": quiz.category.value,
        "mode": quiz.mode_default.value,
        "gift": [],
        "questions": [question_to_obj(q) for q in quiz.questions],
    }
    if quiz.cet_duration_seconds is not None:
        data["cet_duration_seconds"] = quiz.cet_duration_seconds
    if quiz.lock_seconds != DEFAULT_LOCK_SECONDS:
        data["lock_seconds"] = quiz.lock_seconds
    return json.dumps(data, indent=2) + "\n"
