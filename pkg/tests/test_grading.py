"""Grading rules per question type, checked against independent oracles."""

from __future__ import annotations

import itertools
import random
from decimal import Decimal
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from quizkit.errors import OptionIndexError, TypeMismatchError
from quizkit.grading import grade, normalize_text
from quizkit.model import (
    AcceptedAnswer,
    ChoiceOption,
    Circle,
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
    Rect,
    ResponseOption,
    TrueFalseSpec,
)


def q(qtype: QuestionType, spec) -> Question:
    return Question(id="g1", type=qtype, stem="s", spec=spec)


def mr_question(weights: list[int | Fraction]) -> Question:
    options = tuple(ResponseOption(f"opt{i}", Fraction(w)) for i, w in enumerate(weights))
    return q(QuestionType.MULTIPLE_RESPONSE, MultipleResponseSpec(options))


def mr_oracle(weights: list[Fraction], chosen: frozenset[int]) -> Fraction:
    """Independent arithmetic: accumulate chosen weights, clamp to [0, 100]."""
    total = Fraction(0)
    for i in sorted(chosen):
        total += Fraction(weights[i])
    total = total / 100
    if total < 0:
        return Fraction(0)
    if total > 1:
        return Fraction(1)
    return total


class TestTrueFalse:
    def test_exact_match(self):
        question = q(QuestionType.TRUE_FALSE, TrueFalseSpec(correct=True))
        assert grade(question, True).score == 1
        assert grade(question, True).correct is True
        assert grade(question, False).score == 0

    def test_branch_feedback_selection(self):
        spec = TrueFalseSpec(correct=True, feedback_wrong="nope", feedback_right="yes")
        question = q(QuestionType.TRUE_FALSE, spec)
        assert grade(question, True).matched_short_feedback == "yes"
        assert grade(question, False).matched_short_feedback == "nope"

    def test_non_boolean_rejected(self):
        question = q(QuestionType.TRUE_FALSE, TrueFalseSpec(correct=True))
        with pytest.raises(TypeMismatchError):
            grade(question, 1)


class TestMultipleChoice:
    def test_kepler_correct_and_wrong(self, kepler):
        angular = next(i for i, o in enumerate(kepler.spec.options) if o.text == "angular momentum")
        force = next(i for i, o in enumerate(kepler.spec.options) if o.text == "force")
        right = grade(kepler, angular)
        assert (right.score, right.correct) == (Fraction(1), True)
        wrong = grade(kepler, force)
        assert (wrong.score, wrong.correct) == (Fraction(0), False)

    def test_matched_feedback_is_the_chosen_options(self):
        spec = MultipleChoiceSpec(
            (ChoiceOption("x", True, "fx"), ChoiceOption("y", False, "fy"))
        )
        question = q(QuestionType.MULTIPLE_CHOICE, spec)
        assert grade(question, 0).matched_short_feedback == "fx"
        assert grade(question, 1).matched_short_feedback == "fy"

    def test_out_of_range_index(self, kepler):
        with pytest.raises(OptionIndexError):
            grade(kepler, 4)
        with pytest.raises(OptionIndexError):
            grade(kepler, -1)


class TestMultipleResponse:
    def test_spec_examples(self):
        question = mr_question([50, 50, -100])
        # {A, C}: max(0, (50 - 100) / 100) = 0
        assert grade(question, {0, 2}).score == 0
        # {A, B}: (50 + 50) / 100 = 1
        result = grade(question, {0, 1})
        assert result.score == 1 and result.correct is True

    def test_brute_force_equivalence_small(self):
        weight_sets = [
            [Fraction(100)],
            [Fraction(50), Fraction(50)],
            [Fraction(50), Fraction(50), Fraction(-100)],
            [Fraction(100, 3), Fraction(100, 3), Fraction(100, 3), Fraction(-50)],
            [Fraction(25)] * 4 + [Fraction(-25)] * 3,
        ]
        for weights in weight_sets:
            question = mr_question(weights)
            for r in range(len(weights) + 1):
                for combo in itertools.combinations(range(len(weights)), r):
                    chosen = frozenset(combo)
                    result = grade(question, chosen)
                    assert result.score == mr_oracle(weights, chosen)
                    assert Fraction(0) <= result.score <= Fraction(1)
                    assert result.correct is (result.score == 1)

    def test_single_choice_carries_feedback(self):
        options = (
            ResponseOption("a", Fraction(100), short_feedback="fa"),
            ResponseOption("b", Fraction(-50), short_feedback="fb"),
        )
        question = q(QuestionType.MULTIPLE_RESPONSE, MultipleResponseSpec(options))
        assert grade(question, {0}).matched_short_feedback == "fa"
        assert grade(question, {0, 1}).matched_short_feedback is None

    def test_string_response_rejected(self):
        with pytest.raises(TypeMismatchError):
            grade(mr_question([100]), "0")


class TestFillInBlank:
    def make(self):
        spec = FillInBlankSpec(
            (
                AcceptedAnswer("Four", Fraction(100), short_feedback="exact"),
                AcceptedAnswer("4", Fraction(100)),
                AcceptedAnswer("quatre", Fraction(50), short_feedback="french"),
            )
        )
        return q(QuestionType.FILL_IN_BLANK, spec)

    def test_trim_and_casefold(self):
        question = self.make()
        assert grade(question, "  FOUR \t").score == 1
        assert grade(question, "four").matched_short_feedback == "exact"

    def test_partial_credit_and_miss(self):
        question = self.make()
        partial = grade(question, "QUATRE")
        assert partial.score == Fraction(1, 2)
        assert partial.correct is False
        assert partial.matched_short_feedback == "french"
        assert grade(question, "five").score == 0

    @given(st.text(max_size=30))
    def test_normalization_never_crashes(self, text):
        question = self.make()
        result = grade(question, text)
        assert Fraction(0) <= result.score <= Fraction(1)

    def test_best_match_wins_when_duplicated(self):
        spec = FillInBlankSpec(
            (AcceptedAnswer("x", Fraction(50)), AcceptedAnswer("X", Fraction(100)))
        )
        assert grade(q(QuestionType.FILL_IN_BLANK, spec), "x ").score == 1


class TestMatching:
    PAIRS = (MatchPair("a", "1"), MatchPair("b", "2"), MatchPair("c", "3"))

    def test_counting_oracle(self):
        question = q(QuestionType.MATCHING, MatchingSpec(self.PAIRS))
        # Two of three mapped correctly -> 2/3, not correct.
        result = grade(question, {"a": "1", "b": "2", "c": "1"})
        assert result.score == Fraction(2, 3)
        assert result.correct is False
        assert grade(question, {"a": "1", "b": "2", "c": "3"}).correct is True
        assert grade(question, {}).score == 0

    def test_permutation_invariance(self):
        rng = random.Random(7)
        response = {"a": "1", "b": "3", "c": "3"}
        base = grade(q(QuestionType.MATCHING, MatchingSpec(self.PAIRS)), response)
        for _ in range(10):
            pairs = list(self.PAIRS)
            rng.shuffle(pairs)
            shuffled = grade(q(QuestionType.MATCHING, MatchingSpec(tuple(pairs))), response)
            assert shuffled.score == base.score

    def test_extra_keys_ignored_missing_wrong(self):
        question = q(QuestionType.MATCHING, MatchingSpec(self.PAIRS))
        assert grade(question, {"a": "1", "zz": "9"}).score == Fraction(1, 3)


class TestNumericRange:
    def test_inclusive_boundaries(self):
        spec = NumericRangeSpec((NumericInterval(low=Decimal(1), high=Decimal(5)),))
        question = q(QuestionType.NUMERIC_RANGE, spec)
        assert grade(question, Decimal(5)).score == 1
        assert grade(question, Decimal(1)).score == 1
        assert grade(question, Decimal("5.0000001")).score == 0

    def test_target_tolerance_inclusive(self):
        spec = NumericRangeSpec((NumericInterval(target=Decimal("9.8"), tolerance=Decimal("0.2")),))
        question = q(QuestionType.NUMERIC_RANGE, spec)
        assert grade(question, Decimal("10.0")).score == 1
        assert grade(question, Decimal("9.6")).score == 1
        assert grade(question, Decimal("10.01")).score == 0

    def test_highest_credit_interval_wins(self):
        spec = NumericRangeSpec(
            (
                NumericInterval(target=Decimal("5"), tolerance=Decimal("10"), credit=Fraction(1, 2)),
                NumericInterval(target=Decimal("5"), tolerance=Decimal("1"), credit=Fraction(1), short_feedback="spot on"),
            )
        )
        question = q(QuestionType.NUMERIC_RANGE, spec)
        near = grade(question, Decimal("5.5"))
        assert near.score == 1 and near.matched_short_feedback == "spot on"
        far = grade(question, Decimal("12"))
        assert far.score == Fraction(1, 2)

    def test_string_and_float_inputs(self):
        spec = NumericRangeSpec((NumericInterval(target=Decimal("0.3"), tolerance=Decimal("0")),))
        question = q(QuestionType.NUMERIC_RANGE, spec)
        assert grade(question, "0.3").score == 1
        assert grade(question, 0.3).score == 1  # repr(0.3) == '0.3'
        with pytest.raises(TypeMismatchError):
            grade(question, "not a number")


class TestHotspot:
    def test_rect_containment(self):
        region = HotspotRegion(Rect(Decimal("0.2"), Decimal("0.2"), Decimal("0.4"), Decimal("0.4")))
        question = q(QuestionType.HOTSPOT, HotspotSpec("img", (region,)))
        assert grade(question, (Decimal("0.3"), Decimal("0.3"))).score == 1
        # Boundary inclusive on all four edges.
        assert grade(question, (Decimal("0.2"), Decimal("0.6"))).score == 1
        assert grade(question, (Decimal("0.61"), Decimal("0.3"))).score == 0

    def test_circle_containment_exact(self):
        region = HotspotRegion(Circle(Decimal("0.5"), Decimal("0.5"), Decimal("0.25")))
        question = q(QuestionType.HOTSPOT, HotspotSpec("img", (region,)))
        assert grade(question, (Decimal("0.75"), Decimal("0.5"))).score == 1  # on the rim
        assert grade(question, (Decimal("0.76"), Decimal("0.5"))).score == 0

    def test_polygon_interior_edge_and_outside(self):
        triangle = Polygon(((Decimal(0), Decimal(0)), (Decimal(1), Decimal(0)), (Decimal(0), Decimal(1))))
        question = q(QuestionType.HOTSPOT, HotspotSpec("img", (HotspotRegion(triangle),)))
        assert grade(question, ("0.25", "0.25")).score == 1  # interior
        assert grade(question, ("0.5", "0.5")).score == 1  # on the hypotenuse
        assert grade(question, ("0.75", "0.75")).score == 0  # outside

    def test_highest_credit_region_wins(self):
        outer = HotspotRegion(Rect(Decimal(0), Decimal(0), Decimal(1), Decimal(1)), credit=Fraction(1, 4))
        inner = HotspotRegion(Rect(Decimal("0.4"), Decimal("0.4"), Decimal("0.2"), Decimal("0.2")), credit=Fraction(1))
        question = q(QuestionType.HOTSPOT, HotspotSpec("img", (outer, inner)))
        assert grade(question, ("0.5", "0.5")).score == 1
        assert grade(question, ("0.1", "0.1")).score == Fraction(1, 4)

    def test_bad_point_rejected(self):
        region = HotspotRegion(Rect(Decimal(0), Decimal(0), Decimal(1), Decimal(1)))
        question = q(QuestionType.HOTSPOT, HotspotSpec("img", (region,)))
        with pytest.raises(TypeMismatchError):
            grade(question, "0.5,0.5")


def test_grading_is_deterministic(kepler):
    results = {grade(kepler, 1) for _ in range(5)}
    assert len(results) == 1


def test_normalize_text():
    assert normalize_text("  HeLLo\t") == "hello"
    assert normalize_text("straße") == "strasse"
