"""Parser and serializer for the GIFT plain-text quiz format.

Covers the portable GIFT core: ``::title::`` ids, ``//`` comment lines,
``[html]``-style format tags (preserved, never interpreted), backslash
escapes, true/false, single- and multiple-answer choice blocks, fill-in,
matching, and numeric blocks with optional weighted alternatives, plus
per-answer ``#feedback`` and general ``####feedback``.

Hotspot questions are not expressible in GIFT; use the native bank format
(see quizkit.bank). Essay ``{}`` and bare description entries are rejected.

Texts are carried verbatim: parsing unescapes, serializing re-escapes, so
``parse(serialize(parse(s)))`` equals ``parse(s)`` structurally for every
parseable ``s``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Optional

from .errors import ParseError, UnsupportedTypeError
from .model import (
    AcceptedAnswer,
    AnswerSpec,
    ChoiceOption,
    FillInBlankSpec,
    MatchPair,
    MatchingSpec,
    MultipleChoiceSpec,
    MultipleResponseSpec,
    NumericInterval,
    NumericRangeSpec,
    Question,
    QuestionType,
    ResponseOption,
    TrueFalseSpec,
    spec_question_type,
)

MAX_FRACTION_DIGITS = 12

_FORMAT_TAG = re.compile(r"\[(html|markdown|plain|moodle)\]")
_TF_TOKENS = {"T": True, "TRUE": True, "F": False, "FALSE": False}

# Characters the serializer escapes inside texts. '%' is included so an
# answer text starting with '%' cannot be misread as a weight marker, '['
# so a stem starting with "[html]" cannot be misread as a format tag.
_BLOCK_ESCAPES = "\\{}=~#%["
_STEM_ESCAPES = "\\{}["
_TITLE_ESCAPES = "\\:"


@dataclass(frozen=True)
class GiftComment:
    line_number: int
    text: str


@dataclass
class GiftDocument:
    questions: list[Question] = field(default_factory=list)
    comments: list[GiftComment] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


class _Chunk:
    """One question's source: consecutive non-blank, non-comment lines.

    Holds the joined text plus an index -> (line, column) map so every
    ParseError lands inside the original source.
    """

    def __init__(self, lines: list[tuple[int, str]]):
        self.text = "\n".join(t for _, t in lines)
        self.positions: list[tuple[int, int]] = []
        for line_no, line in lines:
            for col in range(1, len(line) + 1):
                self.positions.append((line_no, col))
            self.positions.append((line_no, len(line) + 1))  # the joining '\n'
        if not self.positions:
            self.positions.append((lines[0][0] if lines else 1, 1))

    def where(self, pos: int) -> tuple[int, int]:
        pos = max(0, min(pos, len(self.positions) - 1))
        return self.positions[pos]

    def error(self, pos: int, kind: str, message: str) -> ParseError:
        line, col = self.where(pos)
        return ParseError(line, col, kind, message)


def _find_unescaped(text: str, targets: str, start: int = 0, end: Optional[int] = None) -> int:
    """Index of the first unescaped occurrence of any target char, or -1."""
    if end is None:
        end = len(text)
    i = start
    while i < end:
        c = text[i]
        if c == "\\":
            i += 2
            continue
        if c in targets:
            return i
        i += 1
    return -1


def _find_general_feedback(text: str) -> int:
    """Index of the first unescaped '####' run, or -1."""
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\\":
            i += 2
            continue
        if c == "#" and text.startswith("####", i):
            return i
        i += 1
    return -1


def _unescape(text: str) -> str:
    out: list[str] = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\\" and i + 1 < n:
            nxt = text[i + 1]
            if nxt in "~=#{}:%[\\":
                out.append(nxt)
                i += 2
                continue
            if nxt == "n":
                out.append("\n")
                i += 2
                continue
            # Unknown escape: keep both characters.
            out.append(c)
            out.append(nxt)
            i += 2
            continue
        out.append(c)
        i += 1
    return "".join(out)


def _clean(raw: str) -> str:
    return _unescape(raw).strip()


@dataclass
class _RawAnswer:
    marker: str  # '=' or '~'
    pos: int  # chunk offset of the marker
    weight: Optional[Fraction]
    weight_pos: int
    text_raw: str
    text: str
    feedback: Optional[str]


def _parse_weight(chunk: _Chunk, seg: str, offset: int) -> tuple[Optional[Fraction], int]:
    """Parse a leading %...% weight from an answer segment.

    Returns (weight, length consumed). ``offset`` is the chunk position of
    ``seg[0]`` for error reporting.
    """
    if not seg.startswith("%"):
        return None, 0
    close = seg.find("%", 1)
    if close < 0:
        raise chunk.error(offset, ParseError.MALFORMED_WEIGHT, "unterminated %weight%")
    body = seg[1:close]
    try:
        value = Fraction(Decimal(body))
    except (InvalidOperation, ValueError, OverflowError):
        raise chunk.error(offset + 1, ParseError.MALFORMED_WEIGHT, f"weight {body!r} is not a number")
    if not (Fraction(-100) <= value <= Fraction(100)):
        raise chunk.error(offset + 1, ParseError.MALFORMED_WEIGHT, f"weight {body} outside [-100, 100]")
    return value, close + 1


def _split_answers(chunk: _Chunk, body: str, body_offset: int) -> list[_RawAnswer]:
    """Split an answer block body into =/~ entries with weights and feedback."""
    first = _find_unescaped(body, "=~")
    if first < 0:
        raise chunk.error(body_offset, ParseError.MALFORMED_BLOCK, "answer block has no '=' or '~' entries")
    if body[:first].strip():
        raise chunk.error(
            body_offset, ParseError.MALFORMED_BLOCK, "unexpected text before the first answer marker"
        )

    answers: list[_RawAnswer] = []
    i = first
    n = len(body)
    while i < n:
        marker = body[i]
        seg_start = i + 1
        seg_end = _find_unescaped(body, "=~", seg_start)
        if seg_end < 0:
            seg_end = n
        seg = body[seg_start:seg_end]
        weight, consumed = _parse_weight(chunk, seg.lstrip(), body_offset + seg_start + (len(seg) - len(seg.lstrip())))
        seg_body = seg.lstrip()[consumed:]
        fb_at = _find_unescaped(seg_body, "#")
        if fb_at >= 0:
            feedback: Optional[str] = _clean(seg_body[fb_at + 1 :]) or None
            text_raw = seg_body[:fb_at]
        else:
            feedback = None
            text_raw = seg_body
        text = _clean(text_raw)
        if not text:
            raise chunk.error(body_offset + i, ParseError.EMPTY_ANSWER, "answer text is empty")
        answers.append(
            _RawAnswer(
                marker=marker,
                pos=body_offset + i,
                weight=weight,
                weight_pos=body_offset + seg_start,
                text_raw=text_raw.strip(),
                text=text,
                feedback=feedback,
            )
        )
        i = seg_end
    return answers


_MATCH_SEP = " -> "


def _classify_answers(chunk: _Chunk, answers: list[_RawAnswer]) -> AnswerSpec:
    has_tilde = any(a.marker == "~" for a in answers)
    has_weight = any(a.weight is not None for a in answers)

    if has_tilde:
        if has_weight:
            options = tuple(
                ResponseOption(
                    text=a.text,
                    weight_percent=a.weight if a.weight is not None else (Fraction(100) if a.marker == "=" else Fraction(0)),
                    short_feedback=a.feedback,
                )
                for a in answers
            )
            return MultipleResponseSpec(options)
        options = tuple(
            ChoiceOption(text=a.text, is_correct=(a.marker == "="), short_feedback=a.feedback)
            for a in answers
        )
        return MultipleChoiceSpec(options)

    # All '=' entries: matching when every entry contains the pair separator,
    # fill-in otherwise.
    if all(_MATCH_SEP in a.text_raw for a in answers):
        pairs: list[MatchPair] = []
        seen: set[str] = set()
        for a in answers:
            left_raw, right_raw = a.text_raw.split(_MATCH_SEP, 1)
            left = _clean(left_raw)
            right = _clean(right_raw)
            if left in seen:
                raise chunk.error(a.pos, ParseError.DUPLICATE_MATCH_LEFT, f"duplicate match left side {left!r}")
            seen.add(left)
            pairs.append(MatchPair(left=left, right=right))
        return MatchingSpec(tuple(pairs))

    accepted = tuple(
        AcceptedAnswer(
            text=a.text,
            weight_percent=a.weight if a.weight is not None else Fraction(100),
            short_feedback=a.feedback,
        )
        for a in answers
    )
    return FillInBlankSpec(accepted)


def _parse_decimal(chunk: _Chunk, text: str, pos: int) -> Decimal:
    text = text.strip()
    try:
        value = Decimal(text)
    except InvalidOperation:
        raise chunk.error(pos, ParseError.MALFORMED_NUMBER, f"{text!r} is not a number")
    if not value.is_finite():
        raise chunk.error(pos, ParseError.MALFORMED_NUMBER, f"{text!r} is not a finite number")
    exponent = value.as_tuple().exponent
    if isinstance(exponent, int) and exponent < -MAX_FRACTION_DIGITS:
        raise chunk.error(
            pos, ParseError.MALFORMED_NUMBER, f"{text!r} has more than {MAX_FRACTION_DIGITS} fractional digits"
        )
    return value


def _parse_numeric_value(chunk: _Chunk, text: str, pos: int, credit: Fraction, feedback: Optional[str]) -> NumericInterval:
    text = text.strip()
    if not text:
        raise chunk.error(pos, ParseError.MALFORMED_NUMBER, "empty numeric specification")
    if ".." in text:
        low_txt, high_txt = text.split("..", 1)
        low = _parse_decimal(chunk, low_txt, pos)
        high = _parse_decimal(chunk, high_txt, pos)
        return NumericInterval(low=low, high=high, credit=credit, short_feedback=feedback)
    if ":" in text:
        target_txt, tol_txt = text.split(":", 1)
        target = _parse_decimal(chunk, target_txt, pos)
        tolerance = _parse_decimal(chunk, tol_txt, pos)
        return NumericInterval(target=target, tolerance=tolerance, credit=credit, short_feedback=feedback)
    target = _parse_decimal(chunk, text, pos)
    return NumericInterval(target=target, tolerance=Decimal(0), credit=credit, short_feedback=feedback)


def _parse_numeric_block(chunk: _Chunk, body: str, body_offset: int) -> NumericRangeSpec:
    # body is the block content *after* the leading '#'.
    bad = _find_unescaped(body, "~")
    if bad >= 0:
        raise chunk.error(body_offset + bad, ParseError.MALFORMED_NUMBER, "unexpected '~' in numeric block")

    first_eq = _find_unescaped(body, "=")
    if first_eq < 0:
        # Single unweighted interval, optional per-answer feedback.
        fb_at = _find_unescaped(body, "#")
        feedback = _clean(body[fb_at + 1 :]) or None if fb_at >= 0 else None
        value_txt = body[:fb_at] if fb_at >= 0 else body
        interval = _parse_numeric_value(chunk, value_txt, body_offset, Fraction(1), feedback)
        return NumericRangeSpec((interval,))

    if body[:first_eq].strip():
        raise chunk.error(body_offset, ParseError.MALFORMED_NUMBER, "unexpected text before the first '=' alternative")

    intervals: list[NumericInterval] = []
    i = first_eq
    n = len(body)
    while i < n:
        seg_start = i + 1
        seg_end = _find_unescaped(body, "=", seg_start)
        if seg_end < 0:
            seg_end = n
        seg = body[seg_start:seg_end]
        stripped = seg.lstrip()
        seg_pos = body_offset + seg_start + (len(seg) - len(stripped))
        weight, consumed = _parse_weight(chunk, stripped, seg_pos)
        rest = stripped[consumed:]
        fb_at = _find_unescaped(rest, "#")
        feedback = _clean(rest[fb_at + 1 :]) or None if fb_at >= 0 else None
        value_txt = rest[:fb_at] if fb_at >= 0 else rest
        credit = Fraction(1) if weight is None else weight / 100
        intervals.append(_parse_numeric_value(chunk, value_txt, seg_pos, credit, feedback))
        i = seg_end
    return NumericRangeSpec(tuple(intervals))


def _parse_true_false(chunk: _Chunk, body: str, body_offset: int) -> TrueFalseSpec:
    fb_at = _find_unescaped(body, "#")
    token = (body[:fb_at] if fb_at >= 0 else body).strip().upper()
    correct = _TF_TOKENS[token]
    feedback_wrong = feedback_right = None
    if fb_at >= 0:
        rest = body[fb_at + 1 :]
        second = _find_unescaped(rest, "#")
        if second >= 0:
            feedback_wrong = _clean(rest[:second]) or None
            feedback_right = _clean(rest[second + 1 :]) or None
        else:
            feedback_wrong = _clean(rest) or None
    return TrueFalseSpec(correct=correct, feedback_wrong=feedback_wrong, feedback_right=feedback_right)


def _parse_block(chunk: _Chunk, body: str, body_offset: int) -> tuple[AnswerSpec, Optional[str]]:
    """Parse one {...} body into an answer spec plus general feedback."""
    general: Optional[str] = None
    gf_at = _find_general_feedback(body)
    if gf_at >= 0:
        general = _clean(body[gf_at + 4 :]) or None
        body = body[:gf_at]

    stripped = body.strip()
    if not stripped:
        raise chunk.error(body_offset, ParseError.UNSUPPORTED_GIFT_KIND, "empty answer block (essay questions are not supported)")

    head_end = _find_unescaped(body, "#")
    head = (body[:head_end] if head_end >= 0 else body).strip().upper()
    if head in _TF_TOKENS:
        return _parse_true_false(chunk, body, body_offset), general

    lead = len(body) - len(body.lstrip())
    if body.lstrip().startswith("#"):
        spec = _parse_numeric_block(chunk, body.lstrip()[1:], body_offset + lead + 1)
        return spec, general

    answers = _split_answers(chunk, body, body_offset)
    return _classify_answers(chunk, answers), general


def _parse_chunk(chunk: _Chunk, position: int) -> Question:
    s = chunk.text
    i = 0
    n = len(s)
    while i < n and s[i].isspace():
        i += 1

    title: Optional[str] = None
    if s.startswith("::", i):
        j = i + 2
        while j < n:
            if s[j] == "\\":
                j += 2
                continue
            if s[j] == ":" and j + 1 < n and s[j + 1] == ":":
                break
            j += 1
        else:
            j = n
        if j >= n:
            raise chunk.error(i, ParseError.UNTERMINATED_TITLE, "missing closing '::' for the question title")
        title = _clean(s[i + 2 : j])
        i = j + 2

    while i < n and s[i].isspace():
        i += 1

    stem_format: Optional[str] = None
    tag = _FORMAT_TAG.match(s, i)
    if tag:
        stem_format = tag.group(1)
        i = tag.end()

    # Locate the answer block; a stray '}' before '{' is an error.
    j = i
    brace = -1
    while j < n:
        c = s[j]
        if c == "\\":
            j += 2
            continue
        if c == "}":
            raise chunk.error(j, ParseError.UNBALANCED_BRACE, "'}' without a matching '{'")
        if c == "{":
            brace = j
            break
        j += 1
    if brace < 0:
        raise chunk.error(i, ParseError.UNSUPPORTED_GIFT_KIND, "no answer block (description entries are not supported)")

    stem_pre = _clean(s[i:brace])

    j = brace + 1
    close = -1
    while j < n:
        c = s[j]
        if c == "\\":
            j += 2
            continue
        if c == "{":
            raise chunk.error(j, ParseError.UNBALANCED_BRACE, "nested '{' inside an answer block")
        if c == "}":
            close = j
            break
        j += 1
    if close < 0:
        raise chunk.error(brace, ParseError.UNBALANCED_BRACE, "missing closing '}'")

    rest = s[close + 1 :]
    stray = _find_unescaped(rest, "{}")
    if stray >= 0:
        raise chunk.error(close + 1 + stray, ParseError.UNBALANCED_BRACE, "unexpected brace after the answer block")
    stem_post = _clean(rest)

    spec, general = _parse_block(chunk, s[brace + 1 : close], brace + 1)

    if stem_post:
        stem = (stem_pre + " " if stem_pre else "") + "_____ " + stem_post
    else:
        stem = stem_pre

    return Question(
        id=title if title else f"q{position}",
        type=spec_question_type(spec),
        stem=stem,
        spec=spec,
        detailed_feedback=general,
        stem_format=stem_format,
    )


def parse_gift(source: str) -> GiftDocument:
    """Parse GIFT text into a document of questions plus preserved comments.

    Questions are separated by blank lines; ``//`` comment lines are recorded
    and otherwise ignored. Untitled questions get positional ids ``q<N>``.
    """
    comments: list[GiftComment] = []
    kept: list[tuple[int, str]] = []
    for line_no, line in enumerate(source.split("\n"), start=1):
        if line.lstrip().startswith("//"):
            comments.append(GiftComment(line_no, line))
            continue
        kept.append((line_no, line))

    chunks: list[list[tuple[int, str]]] = []
    current: list[tuple[int, str]] = []
    for line_no, line in kept:
        if line.strip():
            current.append((line_no, line))
        elif current:
            chunks.append(current)
            current = []
    if current:
        chunks.append(current)

    questions: list[Question] = []
    for chunk_lines in chunks:
        questions.append(_parse_chunk(_Chunk(chunk_lines), position=len(questions) + 1))
    return GiftDocument(questions=questions, comments=comments)


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def _escape(text: str, specials: str) -> str:
    out: list[str] = []
    for c in text:
        if c == "\\":
            out.append("\\\\")
        elif c == "\n":
            out.append("\\n")
        elif c in specials:
            out.append("\\" + c)
        else:
            out.append(c)
    return "".join(out)


def _fmt_weight(w: Fraction) -> str:
    """Render a weight as the exact decimal GIFT expects."""
    for digits in range(MAX_FRACTION_DIGITS + 1):
        scaled = w * 10**digits
        if scaled.denominator == 1:
            if digits == 0:
                return str(scaled.numerator)
            sign = "-" if scaled.numerator < 0 else ""
            mag = abs(scaled.numerator)
            whole, frac = divmod(mag, 10**digits)
            frac_txt = str(frac).rjust(digits, "0").rstrip("0")
            return f"{sign}{whole}.{frac_txt}" if frac_txt else f"{sign}{whole}"
    raise UnsupportedTypeError(f"weight {w} is not representable as a {MAX_FRACTION_DIGITS}-digit decimal")


def _fmt_decimal(d: Decimal) -> str:
    return format(d, "f")


def _answer_line(marker: str, weight: Optional[str], text: str, feedback: Optional[str]) -> str:
    parts = [marker]
    if weight is not None:
        parts.append(f"%{weight}%")
    parts.append(_escape(text, _BLOCK_ESCAPES))
    if feedback is not None:
        parts.append("#" + _escape(feedback, _BLOCK_ESCAPES))
    return "".join(parts)


def _serialize_numeric(spec: NumericRangeSpec, general: Optional[str]) -> str:
    def value_txt(iv: NumericInterval) -> str:
        if iv.is_target_form():
            return f"{_fmt_decimal(iv.target)}:{_fmt_decimal(iv.tolerance)}"
        return f"{_fmt_decimal(iv.low)}..{_fmt_decimal(iv.high)}"

    single = spec.intervals[0] if len(spec.intervals) == 1 else None
    if single is not None and single.credit == 1 and single.short_feedback is None and general is None:
        return "{#" + value_txt(single) + "}"

    entries = []
    for iv in spec.intervals:
        entry = "="
        if iv.credit != 1:
            entry += f"%{_fmt_weight(iv.credit * 100)}%"
        entry += value_txt(iv)
        if iv.short_feedback is not None:
            entry += "#" + _escape(iv.short_feedback, _BLOCK_ESCAPES)
        entries.append(entry)
    tail = "####" + _escape(general, _BLOCK_ESCAPES) if general is not None else ""
    return "{#" + " ".join(entries) + tail + "}"


def _serialize_block(q: Question) -> str:
    spec = q.spec
    general = q.detailed_feedback

    if isinstance(spec, TrueFalseSpec):
        body = "T" if spec.correct else "F"
        if spec.feedback_wrong is not None or spec.feedback_right is not None:
            body += "#" + _escape(spec.feedback_wrong or "", _BLOCK_ESCAPES)
            if spec.feedback_right is not None:
                body += "#" + _escape(spec.feedback_right, _BLOCK_ESCAPES)
        if general is not None:
            body += "####" + _escape(general, _BLOCK_ESCAPES)
        return "{" + body + "}"

    if isinstance(spec, NumericRangeSpec):
        return _serialize_numeric(spec, general)

    lines: list[str] = []
    if isinstance(spec, MultipleChoiceSpec):
        for o in spec.options:
            lines.append(_answer_line("=" if o.is_correct else "~", None, o.text, o.short_feedback))
    elif isinstance(spec, MultipleResponseSpec):
        for o in spec.options:
            lines.append(_answer_line("~", _fmt_weight(o.weight_percent), o.text, o.short_feedback))
    elif isinstance(spec, FillInBlankSpec):
        # A block where *every* entry contains " -> " would reparse as
        # matching; GIFT has no escape for the pair separator.
        if spec.accepted and all(_MATCH_SEP in a.text for a in spec.accepted):
            raise UnsupportedTypeError(
                f"question {q.id!r}: every accepted text contains {_MATCH_SEP!r}; use the native bank format"
            )
        for a in spec.accepted:
            weight = None if a.weight_percent == 100 else _fmt_weight(a.weight_percent)
            lines.append(_answer_line("=", weight, a.text, a.short_feedback))
    elif isinstance(spec, MatchingSpec):
        for p in spec.pairs:
            if _MATCH_SEP in p.left or _MATCH_SEP in p.right:
                raise UnsupportedTypeError(
                    f"question {q.id!r}: match text contains {_MATCH_SEP!r}; use the native bank format"
                )
            lines.append("=" + _escape(p.left, _BLOCK_ESCAPES) + _MATCH_SEP + _escape(p.right, _BLOCK_ESCAPES))
    else:
        raise UnsupportedTypeError(f"{type(spec).__name__} cannot be serialized to GIFT")

    if general is not None:
        lines.append("####" + _escape(general, _BLOCK_ESCAPES))
    return "{\n" + "\n".join(lines) + "\n}"


def serialize_gift(doc: GiftDocument) -> str:
    """Emit canonical GIFT: ``::id::`` prefixes, one blank line between questions.

    Raises UnsupportedTypeError when the document contains a hotspot question
    (those only exist in the native bank format).
    """
    bodies: list[str] = []
    for q in doc.questions:
        if q.type is QuestionType.HOTSPOT:
            raise UnsupportedTypeError(f"question {q.id!r}: hotspot questions are not expressible in GIFT")
        head = f"::{_escape(q.id, _TITLE_ESCAPES)}::"
        if q.stem_format:
            head += f"[{q.stem_format}]"
        head += _escape(q.stem, _STEM_ESCAPES)
        bodies.append(head + " " + _serialize_block(q))
    return "\n\n".join(bodies) + "\n" if bodies else ""
