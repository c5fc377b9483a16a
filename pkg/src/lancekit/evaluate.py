"""Benchmark task loading, prediction parsing, scoring, and the end-to-end
evaluation run producing call-accuracy / argument-matching / latency reports."""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import context as ctx
from . import prompt as prompt_mod
from .errors import IoError, LancekitError, NoCallFoundError, TaskSchemaError
from .llm import LlmGateway, LlmResponse
from .model import Language, RepoIndex
from .vindex import VectorIndex

TOKEN_MODE = ctx.TOKEN_MODE
CONVERSATIONAL_MODE = ctx.CONVERSATIONAL_MODE


@dataclass(frozen=True)
class EvalTask:
    id: str
    mode: str
    repo_ref: str
    language: Language
    context_file: str | None
    cursor: int | None
    query: str | None
    expected_call: str
    expected_args: tuple[str, ...]
    accepted_arg_variants: tuple[tuple[str, ...], ...] = ()


@dataclass(frozen=True)
class TaskResult:
    id: str
    predicted_text: str
    call_match: bool
    arg_match: bool
    latency_ms: int
    from_cache: bool = False
    error: str = ""


@dataclass(frozen=True)
class EvalReport:
    tasks: tuple[TaskResult, ...]
    call_accuracy_pct: float
    argument_matching_pct: float
    mean_latency_ms: float
    config: dict
    created_at: str


def load_tasks(path: str | Path) -> list[EvalTask]:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").split("\n")
    except OSError as exc:
        raise IoError(f"cannot read tasks from {path}: {exc}") from exc

    tasks: list[EvalTask] = []
    seen_ids: set[str] = set()
    for line_no, raw in enumerate(lines, start=1):
        if not raw.strip():
            continue
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise TaskSchemaError(f"line {line_no}: malformed record: {exc.msg}") from exc
        try:
            task = _task_from_record(record, base_dir=path.parent)
        except (KeyError, TypeError, ValueError) as exc:
            raise TaskSchemaError(f"line {line_no}: {exc}") from exc
        if task.mode not in (TOKEN_MODE, CONVERSATIONAL_MODE):
            raise TaskSchemaError(f"line {line_no}: unknown mode {task.mode!r}")
        if task.mode == TOKEN_MODE and task.cursor is None:
            raise TaskSchemaError(f"line {line_no}: token task missing cursor")
        if task.mode == TOKEN_MODE and task.context_file is None:
            raise TaskSchemaError(f"line {line_no}: token task missing context_file")
        if task.mode == CONVERSATIONAL_MODE and not task.query:
            raise TaskSchemaError(f"line {line_no}: conversational task missing query")
        if not task.expected_call:
            raise TaskSchemaError(f"line {line_no}: missing expected_call")
        if task.id in seen_ids:
            raise TaskSchemaError(f"line {line_no}: duplicate task id {task.id!r}")
        seen_ids.add(task.id)
        tasks.append(task)
    if not tasks:
        raise TaskSchemaError("zero tasks")
    return tasks


def _task_from_record(record: dict, base_dir: Path | None = None) -> EvalTask:
    repo_ref = record["repo_ref"]
    if base_dir is not None and not Path(repo_ref).is_absolute():
        repo_ref = (base_dir / repo_ref).as_posix()
    return EvalTask(
        id=str(record["id"]),
        mode=record["mode"],
        repo_ref=repo_ref,
        language=Language(record["language"]),
        context_file=record.get("context_file"),
        cursor=record.get("cursor"),
        query=record.get("query"),
        expected_call=record["expected_call"],
        expected_args=tuple(record.get("expected_args", [])),
        accepted_arg_variants=tuple(
            tuple(variant) for variant in record.get("accepted_arg_variants", [])
        ),
    )


_FENCE_RE = re.compile(r"```[^\n]*\n(.*?)```", re.S)
_CALLEE_RE = re.compile(r"([A-Za-z_]\w*(?:\.[A-Za-z_]\w*)*)\s*\(")
_KEYWORDS = frozenset(
    {"if", "for", "while", "switch", "catch", "return", "def", "assert", "print", "with", "elif", "not", "and", "or", "in", "lambda", "synchronized"}
)


def parse_predicted_call(text: str, language: Language | str) -> tuple[str, list[str]]:
    """First call expression in model output: (dotted callee, raw args)."""
    fenced = _FENCE_RE.search(text)
    if fenced:
        text = fenced.group(1)
    for match in _CALLEE_RE.finditer(text):
        callee = match.group(1)
        if callee.split(".")[0] in _KEYWORDS:
            continue
        args, closed = _parse_args(text, match.end())
        if not closed:
            continue
        return callee, args
    raise NoCallFoundError(f"no call expression in {text!r}")


def _parse_args(text: str, start: int) -> tuple[list[str], bool]:
    """Split args at top-level commas from just past '(' ; respects nesting
    of brackets and both quote styles."""
    args: list[str] = []
    current = ""
    depth = 0
    i = start
    while i < len(text):
        char = text[i]
        if char in "'\"":
            quote = char
            current += char
            i += 1
            while i < len(text):
                current += text[i]
                if text[i] == "\\":
                    i += 1
                    if i < len(text):
                        current += text[i]
                elif text[i] == quote:
                    break
                i += 1
            i += 1
            continue
        if char in "([{":
            depth += 1
            current += char
        elif char == ")" and depth == 0:
            if current.strip():
                args.append(current.strip())
            return args, True
        elif char in ")]}":
            depth -= 1
            current += char
        elif char == "," and depth == 0:
            args.append(current.strip())
            current = ""
        else:
            current += char
        i += 1
    return args, False


def resolve_call_name(name: str, index: RepoIndex, file: str | None) -> str:
    """Alias-resolve a dotted call name against a file's import bindings."""
    if file is None:
        return name
    parts = name.split(".")
    bindings = index.imports_by_file.get(file, ())
    for cut in range(len(parts) - 1, 0, -1):
        head = ".".join(parts[:cut])
        for binding in bindings:
            if binding.local_name == head:
                return ".".join([binding.target, *parts[cut:]])
    return name


def score_call(predicted_callee: str, task: EvalTask, index: RepoIndex) -> bool:
    predicted = resolve_call_name(predicted_callee, index, task.context_file)
    expected = resolve_call_name(task.expected_call, index, task.context_file)
    return predicted == expected


def _normalize_arg(arg: str) -> str:
    arg = " ".join(arg.split())
    while arg.startswith("(") and arg.endswith(")"):
        inner, closed = _parse_args(arg, 1)
        if closed and len(inner) == 1:
            arg = inner[0]
        else:
            break
    return arg


def score_arguments(predicted_args: list[str], task: EvalTask) -> bool:
    predicted = [_normalize_arg(a) for a in predicted_args]
    accepted = [list(task.expected_args)] + [list(v) for v in task.accepted_arg_variants]
    return any(predicted == [_normalize_arg(a) for a in variant] for variant in accepted)


def _expected_call_resolves(task: EvalTask, index: RepoIndex) -> bool:
    resolved = resolve_call_name(task.expected_call, index, task.context_file)
    terminal = resolved.rsplit(".", 1)[-1]
    for fn in index.functions:
        qualified = fn.qualified_name
        if resolved == qualified or resolved.endswith("." + qualified):
            return True
        # Instance-receiver ground truths (`processor.processPayment`) cannot
        # alias-resolve to owner.name; the terminal name must still be indexed.
        if terminal == fn.name:
            return True
    return False


def summarize_results(
    results: list[TaskResult] | tuple[TaskResult, ...],
    include_cached_latency: bool = False,
) -> tuple[float, float, float]:
    """(call_accuracy_pct, argument_matching_pct, mean_latency_ms).

    Percentages are 100 * matched / total rounded to one decimal; argument
    credit was conditioned on call match when the results were scored, so
    argument_matching_pct <= call_accuracy_pct always.
    """
    if not results:
        raise ValueError("cannot summarize zero results")
    total = len(results)
    call_pct = round(100.0 * sum(r.call_match for r in results) / total, 1)
    arg_pct = round(100.0 * sum(r.call_match and r.arg_match for r in results) / total, 1)
    if include_cached_latency:
        latencies = [r.latency_ms for r in results]
    else:
        latencies = [r.latency_ms for r in results if not r.from_cache]
    mean_latency = round(sum(latencies) / len(latencies), 1) if latencies else 0.0
    return call_pct, arg_pct, mean_latency


@dataclass
class RunSettings:
    """Knobs run_eval actually consumes; a config snapshot lands in the report."""

    k: int = 10
    token_budget: int = prompt_mod.DEFAULT_TOKEN_BUDGET
    include_cached_latency: bool = False
    extra: dict = field(default_factory=dict)


def _predict(
    task: EvalTask,
    index: RepoIndex,
    vindex: VectorIndex,
    gateway: LlmGateway,
    settings: RunSettings,
) -> LlmResponse:
    root = Path(task.repo_ref)
    content: str | None = None
    if task.context_file is not None:
        content = (root / task.context_file).read_text(encoding="utf-8")

    if task.mode == TOKEN_MODE:
        completion_context = ctx.token_completion_context(
            index, vindex, task.context_file, content, task.cursor, k=settings.k
        )
        prefix = content.encode("utf-8")[: task.cursor].decode("utf-8")
        bundle = prompt_mod.build_token_prompt(
            completion_context, prefix, budget=settings.token_budget
        )
    else:
        # The gateway stands in for the client so query parsing shares the
        # response cache, call budget, and rate limiter.
        completion_context = ctx.query_completion_context(
            index,
            vindex,
            task.query,
            llm=gateway,
            file=task.context_file,
            k=settings.k,
        )
        prefix = content
        if content is not None and task.cursor is not None:
            # Cut the context at the cursor so the ground-truth line that
            # follows the query comment never leaks into the prompt.
            prefix = content.encode("utf-8")[: task.cursor].decode("utf-8")
        bundle = prompt_mod.build_query_prompt(
            completion_context, task.query, file_prefix=prefix, budget=settings.token_budget
        )
    return gateway.complete(bundle)


def run_eval(
    tasks: list[EvalTask],
    index: RepoIndex,
    vindex: VectorIndex,
    gateway: LlmGateway,
    settings: RunSettings | None = None,
) -> EvalReport:
    """Build context, prompt, complete, parse, and score every task.

    Per-task model failures score false and are recorded; only infrastructure
    errors (unreadable repos, schema violations) abort the run.
    """
    settings = settings or RunSettings()
    for task in tasks:
        if not _expected_call_resolves(task, index):
            raise TaskSchemaError(
                f"task {task.id}: expected_call {task.expected_call!r} does not "
                "resolve in the task repository's index"
            )

    results: list[TaskResult] = []
    for task in sorted(tasks, key=lambda t: t.id):
        predicted_text = ""
        call_match = arg_match = False
        latency_ms = 0
        from_cache = False
        error = ""
        try:
            response = _predict(task, index, vindex, gateway, settings)
            predicted_text = response.text
            latency_ms = response.latency_ms
            from_cache = response.from_cache
            callee, args = parse_predicted_call(predicted_text, task.language)
            call_match = score_call(callee, task, index)
            if call_match:
                arg_match = score_arguments(args, task)
        except OSError as exc:
            raise IoError(f"task {task.id}: cannot read task inputs: {exc}") from exc
        except LancekitError as exc:
            error = f"{type(exc).__name__}: {exc}"
        results.append(
            TaskResult(
                id=task.id,
                predicted_text=predicted_text,
                call_match=call_match,
                arg_match=arg_match,
                latency_ms=latency_ms,
                from_cache=from_cache,
                error=error,
            )
        )

    call_pct, arg_pct, mean_latency = summarize_results(
        results, include_cached_latency=settings.include_cached_latency
    )

    config = {
        "k": settings.k,
        "token_budget": settings.token_budget,
        "include_cached_latency": settings.include_cached_latency,
        "backend_id": gateway.client.id,
        "embedder_id": vindex.embedder_id,
        "repo_root": index.repo_root,
        "language": index.language.value,
        **settings.extra,
    }
    return EvalReport(
        tasks=tuple(results),
        call_accuracy_pct=call_pct,
        argument_matching_pct=arg_pct,
        mean_latency_ms=mean_latency,
        config=config,
        created_at=datetime.now(timezone.utc).isoformat(),
    )


def report_to_dict(report: EvalReport) -> dict:
    # from_cache stays out of the document so warm re-runs stay byte-identical.
    return {
        "created_at": report.created_at,
        "config": report.config,
        "aggregates": {
            "call_accuracy_pct": report.call_accuracy_pct,
            "argument_matching_pct": report.argument_matching_pct,
            "mean_latency_ms": report.mean_latency_ms,
        },
        "tasks": [
            {
                "id": r.id,
                "predicted_text": r.predicted_text,
                "call_match": r.call_match,
                "arg_match": r.arg_match,
                "latency_ms": r.latency_ms,
                "error": r.error,
            }
            for r in report.tasks
        ],
    }


def write_report(report: EvalReport, destination: str | Path) -> None:
    destination = Path(destination)
    try:
        destination.parent.mkdir(parents=True, exist_ok=True)
        destination.write_text(
            json.dumps(report_to_dict(report), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
    except OSError as exc:
        raise IoError(f"cannot write report to {destination}: {exc}") from exc


def write_report_csv(report: EvalReport, destination: str | Path) -> None:
    destination = Path(destination)
    try:
        destination.parent.mkdir(parents=True, exist_ok=True)
        with destination.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(["id", "predicted_text", "call_match", "arg_match", "latency_ms"])
            for r in report.tasks:
                writer.writerow([r.id, r.predicted_text, r.call_match, r.arg_match, r.latency_ms])
    except OSError as exc:
        raise IoError(f"cannot write CSV to {destination}: {exc}") from exc
