"""HTTP facade over quiz delivery and reporting.

The service adapts wall-clock time into the engine's explicit-timestamp
contract: every lock and deadline decision uses the server clock, never
anything a client sends. Answer keys, weights, and feedback for unanswered
questions are stripped from every payload.

Sessions live in memory; one request at a time may touch a given session
(per-session mutex), distinct sessions run fully in parallel. Finished
sessions are written to the result store exactly once, keyed by session id.
Unfinished sessions idle past the eviction limit are force-finalized and
recorded when timed, silently dropped when untimed.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import Decimal
from pathlib import Path
from typing import Any, Callable, Optional

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import bank
from .errors import (
    DeadlinePassedError,
    GradingError,
    LockActiveError,
    ManifestError,
    ModeMismatchError,
    NotFinishedError,
    ParseError,
    QuizKitError,
    SessionError,
    StorageError,
    UnsupportedTypeError,
    ValidationError,
    WrongModeError,
    WrongPhaseError,
)
from .model import (
    HotspotSpec,
    MatchingSpec,
    MultipleChoiceSpec,
    MultipleResponseSpec,
    Question,
    QuestionType,
    QuizDefinition,
    QuizMode,
)
from .results import ResultStore, aggregate, csv_bytes, format_percent, overlap_report
from .session import Phase, SessionState, mode_for_quiz, start_session


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


@dataclass
class ServiceConfig:
    store_dir: Path
    quiz_dir: Optional[Path] = None
    static_dir: Optional[Path] = None
    lock_seconds: Optional[int] = None
    idle_eviction_seconds: int = 7200
    clock: Callable[[], datetime] = utcnow


@dataclass
class _LiveSession:
    state: SessionState
    lock: threading.Lock = field(default_factory=threading.Lock)
    last_access: datetime = None  # type: ignore[assignment]
    recorded: bool = False


class _NotFound(QuizKitError):
    code = "not_found"


_STATUS_BY_TYPE: list[tuple[type, int]] = [
    (_NotFound, 404),
    (LockActiveError, 425),
    (DeadlinePassedError, 410),
    (ModeMismatchError, 409),
    (WrongPhaseError, 409),
    (WrongModeError, 409),
    (NotFinishedError, 409),
    (ParseError, 422),
    (ManifestError, 422),
    (ValidationError, 422),
    (GradingError, 422),
    (UnsupportedTypeError, 422),
    (SessionError, 409),
    (StorageError, 500),
]


def _status_for(err: QuizKitError) -> int:
    for etype, status in _STATUS_BY_TYPE:
        if isinstance(err, etype):
            return status
    return 400


def _error_body(err: QuizKitError) -> dict:
    body: dict[str, Any] = {"code": err.code, "message": str(err)}
    if isinstance(err, LockActiveError):
        body["details"] = {"remaining_seconds": err.remaining_seconds}
    elif isinstance(err, ParseError):
        body["details"] = {"line": err.line, "column": err.column, "kind": err.kind}
    elif isinstance(err, ValidationError):
        body["details"] = {"violations": [str(v) for v in err.violations]}
    return body


# ---------------------------------------------------------------------------
# Payload shaping
# ---------------------------------------------------------------------------


def public_question(q: Question) -> dict:
    """The client-safe projection: never answers, weights, or feedback."""
    view: dict[str, Any] = {"id": q.id, "type": q.type.value, "stem": q.stem}
    spec = q.spec
    if isinstance(spec, (MultipleChoiceSpec, MultipleResponseSpec)):
        view["options"] = [o.text for o in spec.options]
    elif isinstance(spec, MatchingSpec):
        view["lefts"] = [p.left for p in spec.pairs]
        view["rights"] = sorted(p.right for p in spec.pairs)
    elif isinstance(spec, HotspotSpec):
        view["image_ref"] = spec.image_ref
    return view


def session_view(state: SessionState, now: datetime) -> dict:
    view: dict[str, Any] = {
        "session_id": state.session_id,
        "phase": state.phase.value,
        "quiz_code": state.quiz.code,
        "mode": state.mode_label,
        "category": state.quiz.category.value,
        "progress": {"answered": state.answered_count(), "total": len(state.quiz.questions)},
    }
    if state.phase is Phase.FINISHED:
        view["question"] = None
        view["percentage"] = state.score_percent()
        view["finished_reason"] = state.finished_reason.value
        return view
    view["question"] = public_question(state.current_question())
    if state.phase is Phase.FEEDBACK_LOCKED and state.pending_feedback is not None:
        view["lock_remaining_seconds"] = state.lock_remaining(now)
        view["feedback"] = {
            "result": "correct" if state.pending_feedback.correct else "incorrect",
            "feedback_text": state.pending_feedback.feedback_text,
        }
    remaining = state.deadline_remaining(now)
    if remaining is not None:
        view["deadline_remaining_seconds"] = remaining
    return view


def _coerce_response(question: Question, raw: Any):
    """Turn a JSON response payload into the engine's response shape."""
    qtype = question.type
    if qtype is QuestionType.TRUE_FALSE:
        return raw
    if qtype is QuestionType.MULTIPLE_CHOICE:
        return raw
    if qtype is QuestionType.MULTIPLE_RESPONSE:
        return frozenset(raw) if isinstance(raw, list) else raw
    if qtype is QuestionType.FILL_IN_BLANK:
        return raw
    if qtype is QuestionType.MATCHING:
        return raw
    if qtype is QuestionType.NUMERIC_RANGE:
        return raw
    if qtype is QuestionType.HOTSPOT:
        if isinstance(raw, dict) and set(raw) >= {"x", "y"}:
            return (raw["x"], raw["y"])
        if isinstance(raw, list):
            return tuple(raw)
        return raw
    return raw


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------


def create_app(config: ServiceConfig) -> FastAPI:
    from contextlib import asynccontextmanager

    @asynccontextmanager
    async def lifespan(_app: FastAPI):
        try:
            yield
        finally:
            store.close()

    app = FastAPI(title="quizkit", docs_url=None, redoc_url=None, lifespan=lifespan)

    store = ResultStore(config.store_dir)
    store_write_lock = threading.Lock()
    quizzes: dict[str, QuizDefinition] = {}
    sessions: dict[str, _LiveSession] = {}
    registry_lock = threading.Lock()

    if config.quiz_dir:
        for path in sorted(Path(config.quiz_dir).glob("*.manifest.json")):
            quiz = bank.load_bank(path)
            quizzes[quiz.code] = quiz

    @app.exception_handler(QuizKitError)
    async def _quizkit_error(_request: Request, err: QuizKitError):
        return JSONResponse(status_code=_status_for(err), content=_error_body(err))

    def now_for(state: SessionState) -> datetime:
        # Server time authority; a wall-clock step backwards is clamped so
        # the engine's monotonic-timestamp rule holds.
        now = config.clock()
        if now < state.last_event_at:
            now = state.last_event_at
        return now

    def record_if_finished(live: _LiveSession) -> None:
        if live.state.phase is Phase.FINISHED and not live.recorded:
            with store_write_lock:
                store.record_session(live.state)
            live.recorded = True

    def sweep_idle(now: datetime) -> None:
        with registry_lock:
            expired = [
                (sid, live)
                for sid, live in sessions.items()
                if (now - live.last_access).total_seconds() > config.idle_eviction_seconds
            ]
            for sid, _ in expired:
                del sessions[sid]
        for _, live in expired:
            with live.lock:
                if live.state.phase is not Phase.FINISHED and live.state.is_timed:
                    cutoff = max(now, live.state.deadline, live.state.last_event_at)
                    live.state.enforce_deadline(cutoff)
                record_if_finished(live)

    def get_session(session_id: str) -> _LiveSession:
        with registry_lock:
            live = sessions.get(session_id)
        if live is None:
            raise _NotFound(f"unknown session {session_id!r}")
        return live

    # -- quiz management ----------------------------------------------------

    @app.post("/api/quizzes", status_code=201)
    async def upload_quiz(request: Request):
        data = json.loads(await request.body(), parse_float=Decimal)
        base_dir = config.quiz_dir or Path.cwd()
        quiz = bank.load_manifest_data(data, base_dir=base_dir)
        with registry_lock:
            quizzes[quiz.code] = quiz
        return {"quiz_code": quiz.code}

    @app.get("/api/quizzes")
    async def list_quizzes():
        with registry_lock:
            items = list(quizzes.values())
        return [
            {
                "code": q.code,
                "subject": q.subject,
                "topic": q.topic,
                "category": q.category.value,
                "mode": q.mode_default.value,
            }
            for q in items
        ]

    # -- sessions ------------------------------------------------------------

    @app.post("/api/sessions", status_code=201)
    async def create_session(request: Request):
        body = json.loads(await request.body())
        quiz_code = body.get("quiz_code")
        student_id = body.get("student_id")
        if not quiz_code or not student_id:
            raise ManifestError("quiz_code and student_id are required")
        with registry_lock:
            quiz = quizzes.get(quiz_code)
        if quiz is None:
            raise _NotFound(f"unknown quiz {quiz_code!r}")

        requested = body.get("mode", quiz.mode_default.value)
        if requested not in (QuizMode.CPT.value, QuizMode.CET.value):
            raise ManifestError(f"mode must be CPT or CET, got {requested!r}")
        if requested != quiz.mode_default.value:
            raise ModeMismatchError(
                f"quiz {quiz.code} is delivered as {quiz.mode_default.value}"
            )
        mode = mode_for_quiz(quiz, lock_seconds=config.lock_seconds)

        now = config.clock()
        sweep_idle(now)
        state = start_session(quiz, mode, student_id, now)
        live = _LiveSession(state=state, last_access=now)
        with registry_lock:
            sessions[state.session_id] = live
        return session_view(state, now)

    @app.get("/api/sessions/{session_id}")
    async def get_session_view(session_id: str):
        live = get_session(session_id)
        with live.lock:
            now = now_for(live.state)
            live.last_access = now
            if live.state.is_timed and live.state.phase is not Phase.FINISHED:
                live.state.enforce_deadline(now)
                record_if_finished(live)
            return session_view(live.state, now)

    @app.post("/api/sessions/{session_id}/answer")
    async def answer(session_id: str, request: Request):
        body = json.loads(await request.body(), parse_float=Decimal)
        if "response" not in body:
            raise ManifestError('the body must carry a "response" field')
        live = get_session(session_id)
        with live.lock:
            now = now_for(live.state)
            live.last_access = now
            state = live.state
            question = state.quiz.questions[min(state.current_index, len(state.quiz.questions) - 1)]
            try:
                outcome = state.submit_answer(_coerce_response(question, body["response"]), now)
            except DeadlinePassedError:
                record_if_finished(live)
                raise
            record_if_finished(live)
            payload: dict[str, Any] = {"view": session_view(state, now)}
            if outcome.notification is not None:
                payload["result"] = outcome.notification
            if outcome.feedback is not None:
                payload["feedback_text"] = outcome.feedback.feedback_text
            return payload

    @app.post("/api/sessions/{session_id}/ack")
    async def acknowledge(session_id: str):
        live = get_session(session_id)
        with live.lock:
            now = now_for(live.state)
            live.last_access = now
            live.state.acknowledge_feedback(now)
            record_if_finished(live)
            return session_view(live.state, now)

    # -- reports -------------------------------------------------------------

    @app.get("/api/reports/table")
    async def report_table(mode: str = "CET", format: str = "json"):
        rows = aggregate(store, mode=mode)
        if format == "csv":
            return Response(content=csv_bytes(rows), media_type="text/csv; charset=utf-8")
        return [
            {
                "subject": r.subject,
                "quiz_code": r.quiz_code,
                "topic": r.topic,
                "category": r.category,
                "mode": r.mode,
                "n_students": r.n_students,
                "average_percent": r.average_percent,
            }
            for r in rows
        ]

    @app.get("/api/reports/overlap")
    async def report_overlap():
        rows = overlap_report(store)
        return [
            {
                "category": r.category,
                "repeated_avg_percent": format_percent(r.repeated_avg_percent),
                "fresh_avg_percent": format_percent(r.fresh_avg_percent),
                "n_repeated": r.n_repeated,
                "n_fresh": r.n_fresh,
            }
            for r in rows
        ]

    if config.static_dir and Path(config.static_dir).is_dir():
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app
