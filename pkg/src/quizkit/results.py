"""Durable attempt/session recording and comparative reporting.

Storage is an append-only line log: one UTF-8 JSON object per line, two
files per store directory (``attempts.jsonl``, ``sessions.jsonl``) plus a
``lock`` file enforcing a single writer. Appends are flushed and fsynced
before a record call returns, so a fresh handle over the same directory
always sees everything previously recorded.

Timestamps are serialized as RFC 3339 UTC; scores as exact rational strings
("19/25"), never floats.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional

from .errors import NotFinishedError, StorageError, StoreLockedError
from .model import FeedbackCategory
from .session import AttemptRecord, Phase, SessionState, round_percent

CSV_HEADER = "subject,quiz_code,topic,category,mode,n_students,average_percent"


@dataclass(frozen=True)
class SessionSummary:
    session_id: str
    student_id: str
    quiz_code: str
    subject: str
    topic: str
    category: str
    mode: str
    finished_reason: str
    percentage: int
    started_at: datetime
    finished_at: datetime


@dataclass(frozen=True)
class ReportRow:
    subject: str
    quiz_code: str
    topic: str
    category: str
    mode: str
    n_students: int
    average_percent: int


@dataclass(frozen=True)
class OverlapRow:
    """Evaluation-test performance on pool-sourced vs. freshly authored questions."""

    category: str
    repeated_avg_percent: Optional[Fraction]
    fresh_avg_percent: Optional[Fraction]
    n_repeated: int
    n_fresh: int


# ---------------------------------------------------------------------------
# JSON encoding helpers
# ---------------------------------------------------------------------------


def _ts(value: datetime) -> str:
    return value.astimezone(timezone.utc).isoformat()


def _parse_ts(value: str) -> datetime:
    return datetime.fromisoformat(value)


def _frac(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _parse_frac(value: str) -> Fraction:
    return Fraction(value)


def _encode_response(value: Any) -> Any:
    if isinstance(value, (frozenset, set)):
        return sorted(value)
    if isinstance(value, Decimal):
        return format(value, "f")
    if isinstance(value, Fraction):
        return _frac(value)
    if isinstance(value, tuple):
        return [_encode_response(v) for v in value]
    return value


def _record_to_obj(r: AttemptRecord) -> dict:
    return {
        "session_id": r.session_id,
        "student_id": r.student_id,
        "quiz_code": r.quiz_code,
        "mode": r.mode,
        "question_id": r.question_id,
        "question_type": r.question_type,
        "source_category": r.source_category,
        "response": _encode_response(r.response),
        "score": _frac(r.score),
        "correct": r.correct,
        "presented_at": _ts(r.presented_at),
        "answered_at": _ts(r.answered_at),
        "feedback_ack_at": _ts(r.feedback_ack_at) if r.feedback_ack_at else None,
    }


def _record_from_obj(obj: dict) -> AttemptRecord:
    return AttemptRecord(
        session_id=obj["session_id"],
        student_id=obj["student_id"],
        quiz_code=obj["quiz_code"],
        mode=obj["mode"],
        question_id=obj["question_id"],
        question_type=obj["question_type"],
        source_category=obj.get("source_category"),
        response=obj.get("response"),
        score=_parse_frac(obj["score"]),
        correct=obj["correct"],
        presented_at=_parse_ts(obj["presented_at"]),
        answered_at=_parse_ts(obj["answered_at"]),
        feedback_ack_at=_parse_ts(obj["feedback_ack_at"]) if obj.get("feedback_ack_at") else None,
    )


def _summary_to_obj(s: SessionSummary) -> dict:
    return {
        "session_id": s.session_id,
        "student_id": s.student_id,
        "quiz_code": s.quiz_code,
        "subject": s.subject,
        "topic": s.topic,
        "category": s.category,
        "mode": s.mode,
        "finished_reason": s.finished_reason,
        "percentage": s.percentage,
        "started_at": _ts(s.started_at),
        "finished_at": _ts(s.finished_at),
    }


def _summary_from_obj(obj: dict) -> SessionSummary:
    return SessionSummary(
        session_id=obj["session_id"],
        student_id=obj["student_id"],
        quiz_code=obj["quiz_code"],
        subject=obj["subject"],
        topic=obj["topic"],
        category=obj["category"],
        mode=obj["mode"],
        finished_reason=obj["finished_reason"],
        percentage=obj["percentage"],
        started_at=_parse_ts(obj["started_at"]),
        finished_at=_parse_ts(obj["finished_at"]),
    )


# ---------------------------------------------------------------------------
# The store
# ---------------------------------------------------------------------------


class ResultStore:
    """Append-only store over one directory; one writer, many readers.

    Open writable handles hold the ``lock`` file exclusively; pass
    ``readonly=True`` for report-only access.
    """

    def __init__(self, directory: Path | str, readonly: bool = False):
        self.directory = Path(directory)
        self.readonly = readonly
        self.directory.mkdir(parents=True, exist_ok=True)
        self._attempts_path = self.directory / "attempts.jsonl"
        self._sessions_path = self.directory / "sessions.jsonl"
        self._lock_path = self.directory / "lock"
        self._lock_fd: Optional[int] = None
        if not readonly:
            self._acquire_lock()
        self._summaries: dict[str, SessionSummary] = {}
        for summary in self._read_summaries():
            self._summaries[summary.session_id] = summary

    # -- lifecycle ---------------------------------------------------------

    def _acquire_lock(self) -> None:
        try:
            self._lock_fd = os.open(self._lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise StoreLockedError(f"store {self.directory} is locked by another writer (file: {self._lock_path})")
        os.write(self._lock_fd, str(os.getpid()).encode("ascii"))

    def close(self) -> None:
        if self._lock_fd is not None:
            os.close(self._lock_fd)
            self._lock_fd = None
            try:
                self._lock_path.unlink()
            except FileNotFoundError:
                pass

    def __enter__(self) -> "ResultStore":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- reading -----------------------------------------------------------

    def _read_lines(self, path: Path) -> list[dict]:
        if not path.exists():
            return []
        out = []
        with path.open("r", encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if line:
                    out.append(json.loads(line))
        return out

    def _read_summaries(self) -> list[SessionSummary]:
        return [_summary_from_obj(o) for o in self._read_lines(self._sessions_path)]

    def summaries(self) -> list[SessionSummary]:
        return list(self._summaries.values())

    def attempts(self) -> list[AttemptRecord]:
        return [_record_from_obj(o) for o in self._read_lines(self._attempts_path)]

    # -- writing -----------------------------------------------------------

    def _append(self, path: Path, objs: list[dict]) -> None:
        if self.readonly:
            raise StorageError("store opened read-only")
        try:
            with path.open("a", encoding="utf-8") as f:
                for obj in objs:
                    f.write(json.dumps(obj, separators=(",", ":"), ensure_ascii=False) + "\n")
                f.flush()
                os.fsync(f.fileno())
        except OSError as err:
            raise StorageError(f"cannot append to {path}: {err}")

    def record_session(self, state: SessionState) -> SessionSummary:
        """Persist a finished session's records and summary, durably.

        Idempotent per session id: recording the same session twice keeps a
        single stored copy and returns the original summary.
        """
        if state.phase is not Phase.FINISHED:
            raise NotFinishedError("only finished sessions can be recorded")
        existing = self._summaries.get(state.session_id)
        if existing is not None:
            return existing
        summary = SessionSummary(
            session_id=state.session_id,
            student_id=state.student_id,
            quiz_code=state.quiz.code,
            subject=state.quiz.subject,
            topic=state.quiz.topic,
            category=state.quiz.category.value,
            mode=state.mode_label,
            finished_reason=state.finished_reason.value,
            percentage=state.score_percent(),
            started_at=state.started_at,
            finished_at=state.finished_at,
        )
        self._append(self._attempts_path, [_record_to_obj(r) for r in state.records])
        self._append(self._sessions_path, [_summary_to_obj(summary)])
        self._summaries[summary.session_id] = summary
        return summary


# ---------------------------------------------------------------------------
# Aggregation and export
# ---------------------------------------------------------------------------


def aggregate(
    store: ResultStore,
    mode: str = "CET",
    subjects: Optional[list[str]] = None,
) -> list[ReportRow]:
    """Average percentage per (subject, quiz code, topic, category) group."""
    groups: dict[tuple[str, str, str, str], list[int]] = {}
    for s in store.summaries():
        if s.mode != mode:
            continue
        if subjects is not None and s.subject not in subjects:
            continue
        groups.setdefault((s.subject, s.quiz_code, s.topic, s.category), []).append(s.percentage)
    rows = []
    for (subject, quiz_code, topic, category), percents in groups.items():
        mean = Fraction(sum(percents), len(percents))
        rows.append(
            ReportRow(
                subject=subject,
                quiz_code=quiz_code,
                topic=topic,
                category=category,
                mode=mode,
                n_students=len(percents),
                average_percent=round_percent(mean),
            )
        )
    rows.sort(key=lambda r: (r.subject, r.quiz_code))
    return rows


def overlap_report(store: ResultStore) -> list[OverlapRow]:
    """Evaluation-test scores on repeated (pool-sourced) vs. fresh questions.

    One row per category in QC1, QC2, QC3 order; the fresh average is
    category-independent and repeated on every row for context.
    """
    cet_records = [r for r in store.attempts() if r.mode == "CET"]
    fresh = [r.score for r in cet_records if r.source_category is None]
    fresh_avg = (sum(fresh, Fraction(0)) / len(fresh) * 100) if fresh else None
    rows = []
    for category in FeedbackCategory:
        repeated = [r.score for r in cet_records if r.source_category == category.value]
        repeated_avg = (sum(repeated, Fraction(0)) / len(repeated) * 100) if repeated else None
        rows.append(
            OverlapRow(
                category=category.value,
                repeated_avg_percent=repeated_avg,
                fresh_avg_percent=fresh_avg,
                n_repeated=len(repeated),
                n_fresh=len(fresh),
            )
        )
    return rows


def _csv_field(value: str) -> str:
    if any(c in value for c in ',"\n\r'):
        return '"' + value.replace('"', '""') + '"'
    return value


def csv_bytes(rows: list[ReportRow]) -> bytes:
    """The report as CSV: fixed header, LF endings, UTF-8, no BOM."""
    lines = [CSV_HEADER]
    for r in rows:
        lines.append(
            ",".join(
                [
                    _csv_field(r.subject),
                    _csv_field(r.quiz_code),
                    _csv_field(r.topic),
                    _csv_field(r.category),
                    _csv_field(r.mode),
                    str(r.n_students),
                    str(r.average_percent),
                ]
            )
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def export_csv(rows: list[ReportRow], out) -> int:
    """Write the CSV to a path or binary file object; returns bytes written."""
    payload = csv_bytes(rows)
    if hasattr(out, "write"):
        written = out.write(payload)
        return written if isinstance(written, int) else len(payload)
    try:
        with open(out, "wb") as f:
            f.write(payload)
    except OSError as err:
        raise StorageError(f"cannot write {out}: {err}")
    return len(payload)


def format_percent(value: Optional[Fraction]) -> str:
    """One-decimal half-up rendering for overlap averages ("66.7", "50")."""
    if value is None:
        return "-"
    tenths = round_percent(value * 10)
    whole, tenth = divmod(tenths, 10)
    return f"{whole}.{tenth}" if tenth else str(whole)
