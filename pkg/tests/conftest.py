"""Shared fixtures and factories for the test suite."""

from __future__ import annotations

from datetime import datetime, timezone

import pytest

from quizkit.model import (
    ChoiceOption,
    FeedbackCategory,
    MultipleChoiceSpec,
    Question,
    QuestionType,
    QuizDefinition,
    QuizMode,
    TrueFalseSpec,
)

KEPLER_STEM = (
    "Kepler's second law regarding constancy of arial velocity of a planet "
    "is a consequence of the law of conservation of"
)
KEPLER_OPTIONS = ["force", "angular momentum", "linear momentum", "energy"]
KEPLER_SHORT = (
    "Kepler's second law of planetary motion is a direct consequence of "
    "angular momentum conservation."
)
KEPLER_DETAILED = (
    "An imaginary line drawn from the center of the sun to the center of the planet "
    "will sweep out equal areas in equal intervals of time. The ellipse traced by a "
    "planet around the Sun has a symmetric shape, but the motion is not symmetric. "
    "This means that the planet moves faster when it is near the sun, slower when it "
    "is far away. Kepler's second law of planetary motion is a direct consequence of "
    "angular momentum conservation."
)


def t(seconds: float = 0) -> datetime:
    """Deterministic timestamp: an epoch plus an offset in seconds."""
    base = datetime(2026, 3, 2, 9, 0, 0, tzinfo=timezone.utc)
    from datetime import timedelta

    return base + timedelta(seconds=seconds)


def kepler_question(qid: str = "K1", with_feedback: bool = True) -> Question:
    options = tuple(
        ChoiceOption(
            text=text,
            is_correct=(text == "angular momentum"),
            short_feedback=KEPLER_SHORT if with_feedback else None,
        )
        for text in KEPLER_OPTIONS
    )
    return Question(
        id=qid,
        type=QuestionType.MULTIPLE_CHOICE,
        stem=KEPLER_STEM,
        spec=MultipleChoiceSpec(options),
        detailed_feedback=KEPLER_DETAILED if with_feedback else None,
        short_feedback=KEPLER_SHORT if with_feedback else None,
        topic="BET1",
    )


def tf_question(qid: str, correct: bool = True, **kw) -> Question:
    return Question(
        id=qid,
        type=QuestionType.TRUE_FALSE,
        stem=f"statement {qid}",
        spec=TrueFalseSpec(correct=correct),
        **kw,
    )


def simple_quiz(
    code: str = "QBE1",
    category: FeedbackCategory = FeedbackCategory.QC1,
    mode: QuizMode = QuizMode.CPT,
    n_questions: int = 3,
    cet_duration: int | None = None,
    lock_seconds: int = 10,
    subject: str = "Basic Electrical",
    topic: str = "BET1",
) -> QuizDefinition:
    questions = tuple(
        tf_question(
            f"q{i}",
            correct=True,
            detailed_feedback=f"detail {i}",
            short_feedback=f"short {i}",
        )
        for i in range(1, n_questions + 1)
    )
    return QuizDefinition(
        code=code,
        subject=subject,
        topic=topic,
        category=category,
        mode_default=mode,
        questions=questions,
        cet_duration_seconds=cet_duration,
        lock_seconds=lock_seconds,
    )


@pytest.fixture
def kepler() -> Question:
    return kepler_question()
