"""Command line tool: validate banks, run terminal sessions, assemble
evaluation tests, emit reports, and launch the HTTP service.

Exit codes: 0 success, 1 validation/parse failure, 2 I/O failure, 3 usage
error. The interactive runner takes its clock, stdin, and stdout as
parameters so tests drive it deterministically; lock enforcement re-prompts
(polling the injected clock) instead of sleeping.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Callable, Optional, TextIO

from . import bank
from .assembly import AssemblyConfig, assemble_cet
from .errors import (
    DeadlinePassedError,
    LockActiveError,
    ManifestError,
    ParseError,
    QuizKitError,
    StorageError,
    ValidationError,
)
from .model import FeedbackCategory, Question, QuestionType, QuizDefinition
from .results import ResultStore, aggregate, csv_bytes, format_percent, overlap_report
from .session import SessionState, mode_for_quiz, start_session
from .service import ServiceConfig, create_app


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 3 instead of argparse's 2
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="quizkit", description="Quiz authoring, delivery, and reporting.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a quiz manifest and its question banks")
    p.add_argument("manifest", type=Path)
    p.add_argument("--json", action="store_true", help="machine-readable diagnostics")

    p = sub.add_parser("run", help="take a quiz in the terminal")
    p.add_argument("manifest", type=Path)
    p.add_argument("--student", required=True)
    p.add_argument("--mode", choices=["CPT", "CET"])
    p.add_argument("--store", type=Path, default=Path("store"))

    p = sub.add_parser("assemble", help="build an evaluation test from practice pools")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("report", help="aggregate recorded results")
    p.add_argument("--store", type=Path, default=Path("store"))
    p.add_argument("--format", choices=["table", "csv"], default="table")
    p.add_argument("--mode", choices=["CPT", "CET"], default="CET")
    p.add_argument("--overlap", action="store_true", help="repeated-vs-fresh question analysis")
    p.add_argument("--out", type=Path, help="write to a file instead of stdout")

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--listen", default="127.0.0.1:8080")
    p.add_argument("--store", type=Path, default=Path("store"))
    p.add_argument("--quiz-dir", type=Path)
    p.add_argument("--static", type=Path)
    p.add_argument("--lock-seconds", type=int)

    return parser


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------


def _cmd_validate(args, out: TextIO) -> int:
    try:
        quiz = bank.load_bank(args.manifest)
    except ValidationError as err:
        if args.json:
            out.write(json.dumps({"status": "error", "errors": [str(v) for v in err.violations]}) + "\n")
        else:
            for v in err.violations:
                out.write(f"invalid: {v}\n")
        return 1
    except ParseError as err:
        if args.json:
            out.write(
                json.dumps(
                    {
                        "status": "error",
                        "errors": [
                            {
                                "file": err.filename,
                                "line": err.line,
                                "column": err.column,
                                "kind": err.kind,
                                "message": err.message,
                            }
                        ],
                    }
                )
                + "\n"
            )
        else:
            out.write(f"parse error: {err}\n")
        return 1
    if args.json:
        out.write(json.dumps({"status": "ok", "code": quiz.code, "questions": len(quiz.questions)}) + "\n")
    else:
        out.write(f"OK {quiz.code}: {len(quiz.questions)} questions\n")
    return 0


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


def _read_line(stdin: TextIO, out: TextIO, prompt: str) -> Optional[str]:
    out.write(prompt)
    out.flush()
    line = stdin.readline()
    if line == "":
        return None
    return line.rstrip("\n")


def _parse_response(question: Question, line: str, stdin: TextIO, out: TextIO):
    """Turn terminal input into a response value, or raise ValueError."""
    qtype = question.type
    text = line.strip()
    if qtype is QuestionType.TRUE_FALSE:
        lowered = text.lower()
        if lowered in ("t", "true", "y", "yes", "1"):
            return True
        if lowered in ("f", "false", "n", "no", "0"):
            return False
        raise ValueError("answer t or f")
    if qtype is QuestionType.MULTIPLE_CHOICE:
        index = int(text) - 1
        if not 0 <= index < len(question.spec.options):
            raise ValueError("option number out of range")
        return index
    if qtype is QuestionType.MULTIPLE_RESPONSE:
        if not text:
            return frozenset()
        indices = frozenset(int(part) - 1 for part in text.split(","))
        if any(not 0 <= i < len(question.spec.options) for i in indices):
            raise ValueError("option number out of range")
        return indices
    if qtype is QuestionType.FILL_IN_BLANK:
        return line
    if qtype is QuestionType.MATCHING:
        rights = sorted(p.right for p in question.spec.pairs)
        mapping = {}
        first = True
        for pair in question.spec.pairs:
            if first:
                chosen = text
                first = False
            else:
                answer = _read_line(stdin, out, f"  match for '{pair.left}' (1-{len(rights)}): ")
                if answer is None:
                    raise EOFError
                chosen = answer.strip()
            index = int(chosen) - 1
            if not 0 <= index < len(rights):
                raise ValueError("choice out of range")
            mapping[pair.left] = rights[index]
        return mapping
    if qtype is QuestionType.NUMERIC_RANGE:
        try:
            return Decimal(text)
        except InvalidOperation:
            raise ValueError("enter a number")
    if qtype is QuestionType.HOTSPOT:
        parts = text.replace(",", " ").split()
        if len(parts) != 2:
            raise ValueError("enter two coordinates in [0,1], e.g. 0.4 0.6")
        return (Decimal(parts[0]), Decimal(parts[1]))
    raise ValueError(f"unsupported question type {qtype}")


def _print_question(state: SessionState, out: TextIO, now: datetime) -> None:
    question = state.current_question()
    total = len(state.quiz.questions)
    out.write(f"\nQuestion {state.current_index + 1}/{total}")
    if state.is_timed:
        remaining = state.deadline_remaining(now)
        out.write(f"  [time remaining: {int(remaining)}s]")
    out.write(f"\n{question.stem}\n")
    spec = question.spec
    if question.type in (QuestionType.MULTIPLE_CHOICE, QuestionType.MULTIPLE_RESPONSE):
        for i, option in enumerate(spec.options, start=1):
            out.write(f"  {i}. {option.text}\n")
        if question.type is QuestionType.MULTIPLE_RESPONSE:
            out.write("  (comma-separated numbers, empty for none)\n")
    elif question.type is QuestionType.TRUE_FALSE:
        out.write("  (t/f)\n")
    elif question.type is QuestionType.MATCHING:
        rights = sorted(p.right for p in spec.pairs)
        for i, right in enumerate(rights, start=1):
            out.write(f"  {i}. {right}\n")
        out.write(f"  match for '{spec.pairs[0].left}' first\n")
    elif question.type is QuestionType.HOTSPOT:
        out.write(f"  [image: {spec.image_ref}] click position as x y in [0,1]\n")


def _run_session(
    quiz: QuizDefinition,
    student_id: str,
    store_dir: Path,
    stdin: TextIO,
    out: TextIO,
    clock: Callable[[], datetime],
) -> int:
    from .session import Phase

    state = start_session(quiz, mode_for_quiz(quiz), student_id, clock())
    out.write(f"{quiz.code}: {quiz.subject} / {quiz.topic} ({state.mode_label})\n")

    while state.phase is not Phase.FINISHED:
        now = clock()
        if state.is_timed:
            state.enforce_deadline(now)
            if state.phase is Phase.FINISHED:
                out.write("\nTime is up.\n")
                break
        _print_question(state, out, now)
        line = _read_line(stdin, out, "> ")
        if line is None:
            out.write("\naborted; nothing recorded\n")
            return 1
        try:
            response = _parse_response(state.current_question(), line, stdin, out)
        except EOFError:
            out.write("\naborted; nothing recorded\n")
            return 1
        except ValueError as err:
            out.write(f"  ! {err}\n")
            continue
        try:
            outcome = state.submit_answer(response, clock())
        except DeadlinePassedError:
            out.write("\nTime is up; that answer was not recorded.\n")
            break

        if outcome.notification is not None:
            out.write("Correct.\n" if outcome.notification == "correct" else "Incorrect.\n")
        if outcome.feedback is not None:
            if outcome.feedback.feedback_text:
                out.write(f"Review: {outcome.feedback.feedback_text}\n")
            while True:
                answer = _read_line(stdin, out, "[press Enter to continue] ")
                if answer is None:
                    out.write("\naborted; nothing recorded\n")
                    return 1
                try:
                    state.acknowledge_feedback(clock())
                    break
                except LockActiveError as err:
                    out.write(f"  locked for another {err.remaining_seconds:.0f}s\n")

    with ResultStore(store_dir) as store:
        summary = store.record_session(state)
    out.write(f"\nFinished ({state.finished_reason.value}). Score: {summary.percentage}%\n")
    return 0


def _cmd_run(args, stdin: TextIO, out: TextIO, clock: Callable[[], datetime]) -> int:
    quiz = bank.load_bank(args.manifest)
    if args.mode and args.mode != quiz.mode_default.value:
        out.write(f"error: quiz {quiz.code} is delivered as {quiz.mode_default.value}\n")
        return 1
    return _run_session(quiz, args.student, args.store, stdin, out, clock)


# ---------------------------------------------------------------------------
# assemble
# ---------------------------------------------------------------------------


def _load_assembly_config(path: Path) -> tuple[AssemblyConfig, dict[FeedbackCategory, QuizDefinition]]:
    data = json.loads(path.read_text(encoding="utf-8"), parse_float=Decimal)
    if isinstance(data, dict) and "assembly" in data:
        data = data["assembly"]
    if not isinstance(data, dict):
        raise ManifestError(f"{path}: expected an assembly configuration object")

    def need(key):
        if key not in data:
            raise ManifestError(f"{path}: missing required key {key!r}")
        return data[key]

    pools: dict[FeedbackCategory, QuizDefinition] = {}
    for cat_name, rel in need("pools").items():
        category = FeedbackCategory(cat_name)
        pools[category] = bank.load_bank(path.parent / rel)

    take = {FeedbackCategory(k): int(v) for k, v in need("take_per_pool").items()}
    new_questions = tuple(
        bank.question_from_obj(o, f"{path} new_questions") for o in data.get("new_questions", [])
    )
    config = AssemblyConfig(
        seed=int(need("seed")),
        take_per_pool=take,
        code=str(need("code")),
        subject=str(need("subject")),
        topic=str(need("topic")),
        cet_duration_seconds=int(need("cet_duration_seconds")),
        new_questions=new_questions,
        shuffle=bool(data.get("shuffle", True)),
        category=FeedbackCategory(data["category"]) if "category" in data else FeedbackCategory.QC3,
        lock_seconds=int(data.get("lock_seconds", 10)),
    )
    return config, pools


def _cmd_assemble(args, out: TextIO) -> int:
    config, pools = _load_assembly_config(args.config)
    quiz = assemble_cet(pools, config)
    args.out.write_text(bank.dump_quiz_manifest(quiz), encoding="utf-8")
    out.write(f"assembled {quiz.code}: {len(quiz.questions)} questions -> {args.out}\n")
    return 0


# ---------------------------------------------------------------------------
# report
# ---------------------------------------------------------------------------


def _cmd_report(args, out: TextIO) -> int:
    store = ResultStore(args.store, readonly=True)
    if args.overlap:
        rows = overlap_report(store)
        if args.format == "csv":
            lines = ["category,repeated_avg_percent,fresh_avg_percent,n_repeated,n_fresh"]
            for r in rows:
                lines.append(
                    f"{r.category},{format_percent(r.repeated_avg_percent)},"
                    f"{format_percent(r.fresh_avg_percent)},{r.n_repeated},{r.n_fresh}"
                )
            payload = "\n".join(lines) + "\n"
        else:
            lines = [f"{'category':<10}{'repeated':>10}{'fresh':>10}{'n_rep':>8}{'n_fresh':>9}"]
            for r in rows:
                lines.append(
                    f"{r.category:<10}{format_percent(r.repeated_avg_percent):>10}"
                    f"{format_percent(r.fresh_avg_percent):>10}{r.n_repeated:>8}{r.n_fresh:>9}"
                )
            payload = "\n".join(lines) + "\n"
    else:
        rows = aggregate(store, mode=args.mode)
        if args.format == "csv":
            payload = csv_bytes(rows).decode("utf-8")
        else:
            lines = [f"{'subject':<26}{'code':<8}{'topic':<10}{'cat':<5}{'n':>4}{'avg%':>6}"]
            for r in rows:
                lines.append(
                    f"{r.subject:<26}{r.quiz_code:<8}{r.topic:<10}{r.category:<5}{r.n_students:>4}{r.average_percent:>6}"
                )
            payload = "\n".join(lines) + "\n"
    if args.out:
        args.out.write_text(payload, encoding="utf-8")
    else:
        out.write(payload)
    return 0


# ---------------------------------------------------------------------------
# serve
# ---------------------------------------------------------------------------


def _cmd_serve(args, out: TextIO) -> int:
    import uvicorn

    host, _, port = args.listen.rpartition(":")
    config = ServiceConfig(
        store_dir=args.store,
        quiz_dir=args.quiz_dir,
        static_dir=args.static,
        lock_seconds=args.lock_seconds,
    )
    app = create_app(config)
    out.write(f"serving on http://{args.listen}\n")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


# ---------------------------------------------------------------------------


def main(
    argv: Optional[list[str]] = None,
    stdin: Optional[TextIO] = None,
    stdout: Optional[TextIO] = None,
    clock: Optional[Callable[[], datetime]] = None,
) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    out = stdout if stdout is not None else sys.stdout
    clock = clock or (lambda: datetime.now(timezone.utc))

    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 3

    try:
        if args.command == "validate":
            return _cmd_validate(args, out)
        if args.command == "run":
            return _cmd_run(args, stdin, out, clock)
        if args.command == "assemble":
            return _cmd_assemble(args, out)
        if args.command == "report":
            return _cmd_report(args, out)
        if args.command == "serve":
            return _cmd_serve(args, out)
        raise _UsageError(f"unknown command {args.command!r}")
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 2
    except StorageError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return 2
    except QuizKitError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except _UsageError as err:
        print(f"usage error: {err}", file=sys.stderr)
        return 3


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
