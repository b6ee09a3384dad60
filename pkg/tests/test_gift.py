"""GIFT parser and serializer behavior, including round-trip guarantees."""

from __future__ import annotations

import random
from decimal import Decimal
from fractions import Fraction
from pathlib import Path

import pytest

from quizkit.errors import ParseError, UnsupportedTypeError
from quizkit.gift import GiftDocument, parse_gift, serialize_gift
from quizkit.model import (
    HotspotRegion,
    HotspotSpec,
    MultipleChoiceSpec,
    Question,
    QuestionType,
    Rect,
    TrueFalseSpec,
)

DATA = Path(__file__).parent / "data"

KEPLER_GIFT = (
    "::K1::Kepler's second law regarding constancy of arial velocity of a planet "
    "is a consequence of the law of conservation of "
    "{~force =angular momentum ~linear momentum ~energy"
    "####Kepler's second law of planetary motion is a direct consequence of "
    "angular momentum conservation.}"
)


def parse_one(text: str) -> Question:
    doc = parse_gift(text)
    assert len(doc.questions) == 1
    return doc.questions[0]


class TestParsing:
    def test_kepler_multiple_choice(self):
        q = parse_one(KEPLER_GIFT)
        assert q.id == "K1"
        assert q.type is QuestionType.MULTIPLE_CHOICE
        assert isinstance(q.spec, MultipleChoiceSpec)
        texts = [o.text for o in q.spec.options]
        assert texts == ["force", "angular momentum", "linear momentum", "energy"]
        correct = [o.text for o in q.spec.options if o.is_correct]
        assert correct == ["angular momentum"]
        assert q.detailed_feedback == (
            "Kepler's second law of planetary motion is a direct consequence of "
            "angular momentum conservation."
        )

    def test_true_false(self):
        q = parse_one("::T1::2+2=4 {T}")
        assert q.type is QuestionType.TRUE_FALSE
        assert q.spec == TrueFalseSpec(correct=True)
        assert parse_one("x {FALSE}").spec.correct is False

    def test_true_false_branch_feedback(self):
        q = parse_one("water boils at 90 C at sea level {F#No, 100 C at sea level.#Correct.}")
        assert q.spec.correct is False
        assert q.spec.feedback_wrong == "No, 100 C at sea level."
        assert q.spec.feedback_right == "Correct."

    def test_numeric_target_tolerance(self):
        # Hand-parse: '#' marks numeric, '9.8:0.2' is target:tolerance.
        q = parse_one("::N1::Value of g? {#9.8:0.2}")
        assert q.type is QuestionType.NUMERIC_RANGE
        iv = q.spec.intervals[0]
        assert (iv.target, iv.tolerance) == (Decimal("9.8"), Decimal("0.2"))
        assert iv.credit == 1

    def test_numeric_range_and_bare_target(self):
        iv = parse_one("x {#1..5}").spec.intervals[0]
        assert (iv.low, iv.high) == (Decimal(1), Decimal(5))
        iv = parse_one("x {#42}").spec.intervals[0]
        assert (iv.target, iv.tolerance) == (Decimal(42), Decimal(0))

    def test_numeric_weighted_alternatives(self):
        q = parse_one("x {#=1822:0 =%50%1822:2#Close enough.}")
        first, second = q.spec.intervals
        assert first.credit == 1 and first.target == Decimal(1822)
        assert second.credit == Fraction(1, 2)
        assert second.short_feedback == "Close enough."

    def test_multiple_response_weights(self):
        q = parse_one("x {~%50%A ~%50%B ~%-100%C}")
        assert q.type is QuestionType.MULTIPLE_RESPONSE
        weights = [o.weight_percent for o in q.spec.options]
        assert weights == [Fraction(50), Fraction(50), Fraction(-100)]

    def test_fill_in_blank_vs_choice_classification(self):
        only_eq = parse_one("capital of France? {=Paris =paris}")
        assert only_eq.type is QuestionType.FILL_IN_BLANK
        with_tilde = parse_one("capital of France? {=Paris ~London}")
        assert with_tilde.type is QuestionType.MULTIPLE_CHOICE

    def test_fill_in_mid_sentence_keeps_a_gap_marker(self):
        q = parse_one("Grant is {=entombed} in Grant's tomb.")
        assert q.stem == "Grant is _____ in Grant's tomb."
        assert q.spec.accepted[0].text == "entombed"

    def test_matching_pairs(self):
        q = parse_one("match {=a -> 1 =b -> 2 =c -> 3}")
        assert q.type is QuestionType.MATCHING
        assert [(p.left, p.right) for p in q.spec.pairs] == [("a", "1"), ("b", "2"), ("c", "3")]

    def test_duplicate_match_left_is_a_parse_error(self):
        with pytest.raises(ParseError) as exc:
            parse_gift("match {=a -> 1 =a -> 2}")
        assert exc.value.kind == ParseError.DUPLICATE_MATCH_LEFT

    def test_per_answer_feedback_lands_on_options(self):
        q = parse_one("pick {=right#well done ~wrong#try again}")
        assert q.spec.options[0].short_feedback == "well done"
        assert q.spec.options[1].short_feedback == "try again"

    def test_untitled_questions_get_positional_ids(self):
        doc = parse_gift("first {T}\n\n::N::second {F}\n\nthird {T}")
        assert [q.id for q in doc.questions] == ["q1", "N", "q3"]

    def test_comments_are_preserved_and_ignored(self):
        src = "// bank header\nq one {T}\n// between\n\nq two {F}\n"
        doc = parse_gift(src)
        assert [q.stem for q in doc.questions] == ["q one", "q two"]
        assert [(c.line_number, c.text) for c in doc.comments] == [
            (1, "// bank header"),
            (3, "// between"),
        ]

    def test_format_tag_preserved_not_interpreted(self):
        q = parse_one("::H::[html]Bold <b>move</b> {T}")
        assert q.stem_format == "html"
        assert q.stem == "Bold <b>move</b>"

    def test_escapes_unescape_to_literals(self):
        q = parse_one(r"::E::A \{brace\} and \= sign {=x \~ y#fb \# here}")
        assert q.stem == "A {brace} and = sign"
        assert q.spec.accepted[0].text == "x ~ y"
        assert q.spec.accepted[0].short_feedback == "fb # here"

    def test_escaped_newline(self):
        q = parse_one(r"line\nbreak {T}")
        assert q.stem == "line\nbreak"


class TestParseErrors:
    def test_unbalanced_brace_points_at_the_opening_brace(self):
        with pytest.raises(ParseError) as exc:
            parse_gift("Q {=a ~b")
        err = exc.value
        assert err.kind == ParseError.UNBALANCED_BRACE
        assert (err.line, err.column) == (1, 3)

    def test_stray_closing_brace(self):
        with pytest.raises(ParseError) as exc:
            parse_gift("what } now {T}")
        assert exc.value.kind == ParseError.UNBALANCED_BRACE

    def test_empty_block_is_unsupported_essay(self):
        with pytest.raises(ParseError) as exc:
            parse_gift("write an essay {}")
        assert exc.value.kind == ParseError.UNSUPPORTED_GIFT_KIND

    def test_description_without_block_is_unsupported(self):
        with pytest.raises(ParseError) as exc:
            parse_gift("just some text with no answers")
        assert exc.value.kind == ParseError.UNSUPPORTED_GIFT_KIND

    def test_malformed_weight_non_numeric(self):
        with pytest.raises(ParseError) as exc:
            parse_gift("x {~%abc%A ~B}")
        assert exc.value.kind == ParseError.MALFORMED_WEIGHT

    def test_malformed_weight_out_of_range(self):
        with pytest.raises(ParseError) as exc:
            parse_gift("x {~%150%A ~B}")
        assert exc.value.kind == ParseError.MALFORMED_WEIGHT

    def test_malformed_numeric(self):
        with pytest.raises(ParseError) as exc:
            parse_gift("x {#banana}")
        assert exc.value.kind == ParseError.MALFORMED_NUMBER

    def test_numeric_too_many_fraction_digits(self):
        with pytest.raises(ParseError) as exc:
            parse_gift("x {#1.0000000000001}")
        assert exc.value.kind == ParseError.MALFORMED_NUMBER

    def test_empty_answer_text(self):
        with pytest.raises(ParseError) as exc:
            parse_gift("x {= ~b}")
        assert exc.value.kind == ParseError.EMPTY_ANSWER

    def test_error_position_is_inside_the_source(self):
        sources = ["Q {=a ~b", "x {#bad}", "x {~%9z%A ~B}", "t {"]
        for src in sources:
            with pytest.raises(ParseError) as exc:
                parse_gift(src)
            lines = src.split("\n")
            assert 1 <= exc.value.line <= len(lines)
            assert 1 <= exc.value.column <= len(lines[exc.value.line - 1]) + 1


class TestSerialization:
    def test_canonical_true_false(self):
        q = Question(id="T1", type=QuestionType.TRUE_FALSE, stem="2+2=4", spec=TrueFalseSpec(correct=True))
        assert serialize_gift(GiftDocument(questions=[q])) == "::T1::2+2=4 {T}\n"

    def test_stem_braces_are_escaped_and_round_trip(self):
        q = parse_one(r"contains \{x\} literally {T}")
        out = serialize_gift(GiftDocument(questions=[q]))
        assert r"\{x\}" in out
        assert parse_one(out).stem == "contains {x} literally"

    def test_hotspot_is_rejected(self):
        region = HotspotRegion(Rect(Decimal("0.1"), Decimal("0.1"), Decimal("0.2"), Decimal("0.2")))
        q = Question(
            id="H", type=QuestionType.HOTSPOT, stem="click", spec=HotspotSpec("img.png", (region,))
        )
        with pytest.raises(UnsupportedTypeError):
            serialize_gift(GiftDocument(questions=[q]))

    def test_blank_line_between_questions(self):
        doc = parse_gift("a {T}\n\nb {F}")
        assert serialize_gift(doc) == "::q1::a {T}\n\n::q2::b {F}\n"


class TestRoundTrip:
    def test_corpus_round_trips(self):
        source = (DATA / "corpus.gift").read_text(encoding="utf-8")
        first = parse_gift(source)
        assert len(first.questions) >= 40
        types = {q.type for q in first.questions}
        assert types == {
            QuestionType.TRUE_FALSE,
            QuestionType.MULTIPLE_CHOICE,
            QuestionType.MULTIPLE_RESPONSE,
            QuestionType.FILL_IN_BLANK,
            QuestionType.MATCHING,
            QuestionType.NUMERIC_RANGE,
        }
        second = parse_gift(serialize_gift(first))
        assert second.questions == first.questions

    def test_metacharacter_texts_survive_byte_for_byte(self):
        nasty = "a~b=c#d{e}f:g%h[i\\j\nk"
        q = Question(id="N", type=QuestionType.TRUE_FALSE, stem=nasty, spec=TrueFalseSpec(True))
        out = serialize_gift(GiftDocument(questions=[q]))
        assert parse_one(out).stem == nasty

    def test_double_round_trip_is_stable(self):
        source = (DATA / "corpus.gift").read_text(encoding="utf-8")
        once = serialize_gift(parse_gift(source))
        twice = serialize_gift(parse_gift(once))
        assert once == twice


class TestFuzzSmoke:
    def test_random_inputs_parse_or_raise_located_errors(self):
        rng = random.Random(20260309)
        alphabets = [
            "".join(chr(i) for i in range(32, 127)),
            "{}=~#%:\\n \t",
            "::ab{}=~# %50%->\n",
        ]
        for trial in range(5000):
            alphabet = alphabets[trial % len(alphabets)]
            length = rng.randrange(0, 80)
            src = "".join(rng.choice(alphabet) for _ in range(length))
            try:
                doc = parse_gift(src)
            except ParseError as err:
                lines = src.split("\n")
                assert 1 <= err.line <= len(lines)
                assert 1 <= err.column <= len(lines[err.line - 1]) + 2
            else:
                assert isinstance(doc, GiftDocument)


class TestValidationRoundTrip:
    def test_valid_quiz_revalidates_clean_after_round_trip(self):
        import dataclasses

        from quizkit.model import FeedbackCategory, QuizDefinition, QuizMode, validate_quiz

        source = (DATA / "corpus.gift").read_text(encoding="utf-8")
        questions = tuple(parse_gift(source).questions)
        quiz = QuizDefinition(
            code="QALL",
            subject="Mixed",
            topic="ALL",
            category=FeedbackCategory.QC3,
            mode_default=QuizMode.CPT,
            questions=questions,
        )
        assert validate_quiz(quiz) == []
        reparsed = parse_gift(serialize_gift(GiftDocument(questions=list(questions))))
        round_tripped = dataclasses.replace(quiz, questions=tuple(reparsed.questions))
        assert validate_quiz(round_tripped) == []
