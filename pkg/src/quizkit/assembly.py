"""Deterministic evaluation-test assembly from practice pools.

An evaluation test is drawn from the QC1/QC2/QC3 practice banks plus newly
authored questions. Sampling is reproducible across platforms:

- candidates are the pool's questions sorted by id (lexicographically, by
  Unicode code point), so pool file order never matters;
- a splitmix64-seeded xoshiro256** generator drives a partial Fisher-Yates
  shuffle per pool (pools visited in QC1, QC2, QC3 order), then one full
  Fisher-Yates pass over the combined list when shuffling is requested;
- bounded draws use rejection sampling on the top 64-bit range, so there is
  no modulo bias and the stream is identical everywhere.

Sampled questions get ids prefixed with their pool's quiz code and carry
that pool's category as provenance; new questions carry none.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

from .errors import CountExceedsPoolError, DuplicateIdError, ValidationError
from .model import FeedbackCategory, Question, QuizDefinition, QuizMode, validate_quiz

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (next_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** seeded from splitmix64, as pinned in the module docs."""

    def __init__(self, seed: int):
        state = seed & _MASK64
        self.s = []
        for _ in range(4):
            state, out = splitmix64(state)
            self.s.append(out)

    def next64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, n: int) -> int:
        """Uniform draw in [0, n) via rejection sampling (no modulo bias)."""
        if n <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next64()
            if r < limit:
                return r % n


def _partial_shuffle_take(items: list, k: int, rng: Xoshiro256StarStar) -> list:
    """First k elements of a Fisher-Yates shuffle of items (consumed draws: k)."""
    arr = list(items)
    for i in range(k):
        j = i + rng.below(len(arr) - i)
        arr[i], arr[j] = arr[j], arr[i]
    return arr[:k]


def _full_shuffle(items: list, rng: Xoshiro256StarStar) -> list:
    arr = list(items)
    for i in range(len(arr) - 1, 0, -1):
        j = rng.below(i + 1)
        arr[i], arr[j] = arr[j], arr[i]
    return arr


@dataclass(frozen=True)
class AssemblyConfig:
    """How to build one evaluation test."""

    seed: int
    take_per_pool: dict[FeedbackCategory, int]
    code: str
    subject: str
    topic: str
    cet_duration_seconds: int
    new_questions: tuple[Question, ...] = ()
    shuffle: bool = True
    category: FeedbackCategory = FeedbackCategory.QC3
    lock_seconds: int = 10


def assemble_cet(
    pools: dict[FeedbackCategory, QuizDefinition], config: AssemblyConfig
) -> QuizDefinition:
    """Draw questions from the practice pools and append the new ones.

    Identical inputs produce an identical quiz; permuting the ``pools``
    mapping's insertion order changes nothing.
    """
    for category, pool in pools.items():
        violations = validate_quiz(pool)
        if violations:
            raise ValidationError(violations)

    rng = Xoshiro256StarStar(config.seed)
    selected: list[Question] = []
    for category in (FeedbackCategory.QC1, FeedbackCategory.QC2, FeedbackCategory.QC3):
        count = config.take_per_pool.get(category, 0)
        if count == 0:
            continue
        pool = pools.get(category)
        pool_size = len(pool.questions) if pool else 0
        if count > pool_size:
            raise CountExceedsPoolError(
                f"take {count} from {category.value} pool of {pool_size} questions"
            )
        candidates = sorted(pool.questions, key=lambda q: q.id)
        for question in _partial_shuffle_take(candidates, count, rng):
            selected.append(
                dataclasses.replace(
                    question,
                    id=f"{pool.code}.{question.id}",
                    source_category=category,
                )
            )

    for question in config.new_questions:
        if question.source_category is not None:
            question = dataclasses.replace(question, source_category=None)
        selected.append(question)

    if config.shuffle:
        selected = _full_shuffle(selected, rng)

    seen: set[str] = set()
    for question in selected:
        if question.id in seen:
            raise DuplicateIdError(f"duplicate question id {question.id!r} in the assembled test")
        seen.add(question.id)

    quiz = QuizDefinition(
        code=config.code,
        subject=config.subject,
        topic=config.topic,
        category=config.category,
        mode_default=QuizMode.CET,
        questions=tuple(selected),
        cet_duration_seconds=config.cet_duration_seconds,
        lock_seconds=config.lock_seconds,
    )
    violations = validate_quiz(quiz)
    if violations:
        raise ValidationError(violations)
    return quiz
