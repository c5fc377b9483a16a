"""Command-line surface: index / complete / eval / inspect.

Exit codes: 0 success, 2 usage or data error, 3 remote service error.
Backends default to the offline mock and hash embedder so every command
works without network access.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import context as ctx
from . import evaluate as ev
from . import prompt as prompt_mod
from .config import RunConfig
from .embed import DEFAULT_EMBED_MODEL, HashEmbedder, RemoteEmbedder
from .errors import AuthError, LancekitError, ServiceError
from .extract import DEFAULT_EXCLUDES, index_repository
from .llm import DEFAULT_CHAT_MODEL, LlmGateway, MockLlmClient, RemoteLlmClient
from .model import Language, RepoIndex, load_index, save_index
from .syntax import position_of
from .vindex import build_vector_index, load_vector_index, save_vector_index

EXIT_OK = 0
EXIT_DATA = 2
EXIT_SERVICE = 3


def _embedder_for(config: RunConfig):
    if config.embedder == "remote":
        return RemoteEmbedder(
            model=config.model or DEFAULT_EMBED_MODEL, cache_dir=config.cache_dir
        )
    return HashEmbedder()


def _client_for(config: RunConfig):
    if config.llm == "remote":
        return RemoteLlmClient(model=config.model or DEFAULT_CHAT_MODEL)
    return MockLlmClient()


def _vector_sidecar(index_path: Path) -> Path:
    return index_path.with_name(index_path.name + ".vec")


def _load_index_pair(index_path: Path, config: RunConfig):
    index = load_index(index_path)
    embedder = _embedder_for(config)
    sidecar = _vector_sidecar(index_path)
    if sidecar.exists():
        vindex = load_vector_index(sidecar, embedder=embedder)
        if vindex.embedder_id == embedder.id:
            return index, vindex
    return index, build_vector_index(index, embedder)


def _relative_file(index: RepoIndex, file_arg: str) -> str:
    path = Path(file_arg)
    root = Path(index.repo_root)
    if path.is_absolute():
        try:
            return path.relative_to(root.resolve()).as_posix()
        except ValueError:
            return path.as_posix()
    try:
        return path.relative_to(root).as_posix()
    except ValueError:
        return path.as_posix()


def cmd_index(args: argparse.Namespace) -> int:
    config = _config_from(args)
    excludes = DEFAULT_EXCLUDES + tuple(config.exclude_globs)
    index = index_repository(args.root, args.lang, exclude_globs=excludes)
    out = Path(args.out)
    save_index(index, out)
    vindex = build_vector_index(index, _embedder_for(config))
    save_vector_index(vindex, _vector_sidecar(out))
    import_count = sum(len(bs) for bs in index.imports_by_file.values())
    print(
        f"indexed {index.repo_root}: functions={len(index.functions)} "
        f"entities={len(index.entities)} imports={import_count} "
        f"skipped={len(index.skipped_files)}"
    )
    print(f"wrote {out} and {_vector_sidecar(out)}")
    return EXIT_OK


def _print_explain(context: ctx.CompletionContext) -> None:
    print(f"resolved: {context.resolved_module}  cues: {', '.join(context.local_cues) or '-'}")
    print(f"{'rank':<6}{'score':<12}candidate")
    for position, (fn, score) in enumerate(context.candidates, start=1):
        print(f"{position:<6}{score:<12.4f}{fn.qualified_name}")


def cmd_complete(args: argparse.Namespace) -> int:
    config = _config_from(args)
    index, vindex = _load_index_pair(Path(args.index), config)
    client = _client_for(config)
    gateway = LlmGateway(client, cache_dir=config.cache_dir, max_calls=config.max_calls)

    if args.complete_mode == "token":
        file = _relative_file(index, args.file)
        content = (Path(index.repo_root) / file).read_text(encoding="utf-8")
        context = ctx.token_completion_context(
            index, vindex, file, content, args.cursor, k=config.k
        )
        prefix = content.encode("utf-8")[: args.cursor].decode("utf-8")
        bundle = prompt_mod.build_token_prompt(context, prefix, budget=config.token_budget)
    else:
        file = _relative_file(index, args.file) if args.file else None
        content = (
            (Path(index.repo_root) / file).read_text(encoding="utf-8") if file else None
        )
        context = ctx.query_completion_context(
            index, vindex, args.query, llm=gateway, file=file, k=config.k
        )
        bundle = prompt_mod.build_query_prompt(
            context, args.query, file_prefix=content, budget=config.token_budget
        )

    response = gateway.complete(bundle)
    print(response.text)
    if args.explain:
        _print_explain(context)
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    config = _config_from(args)
    index, vindex = _load_index_pair(Path(args.index), config)
    tasks = ev.load_tasks(args.tasks)
    if args.mode != "all":
        tasks = [t for t in tasks if t.mode == args.mode]
        if not tasks:
            raise ev.TaskSchemaError(f"zero tasks after --mode {args.mode} filter")
    client = _client_for(config)
    gateway = LlmGateway(client, cache_dir=config.cache_dir, max_calls=config.max_calls)
    settings = ev.RunSettings(
        k=config.k,
        token_budget=config.token_budget,
        include_cached_latency=config.include_cached_latency,
    )
    report = ev.run_eval(tasks, index, vindex, gateway, settings)
    ev.write_report(report, args.report)
    if args.csv:
        ev.write_report_csv(report, args.csv)
    print(
        f"call={report.call_accuracy_pct}% args={report.argument_matching_pct}% "
        f"latency={report.mean_latency_ms}ms"
    )
    print(f"wrote {args.report}" + (f" and {args.csv}" if args.csv else ""))
    return EXIT_OK


def cmd_inspect(args: argparse.Namespace) -> int:
    index = load_index(args.index)
    import_count = sum(len(bs) for bs in index.imports_by_file.values())
    print(f"repo_root: {index.repo_root}")
    print(f"language: {index.language.value}")
    print(f"created_at: {index.created_at}")
    print(
        f"functions={len(index.functions)} entities={len(index.entities)} "
        f"imports={import_count} skipped={len(index.skipped_files)}"
    )
    if args.entity:
        entity = index.entity_by_name(args.entity)
        if entity is None:
            print(f"no entity named {args.entity!r}")
            return EXIT_DATA
        print(f"{entity.kind.value} {entity.name} ({entity.file})")
        try:
            source = (Path(index.repo_root) / entity.file).read_bytes()
        except OSError:
            source = None
        for key in entity.methods:
            fn = index.function_by_key(key)
            if fn is not None:
                params = ", ".join(p.name for p in fn.parameters)
                where = ""
                if source is not None:
                    line, _ = position_of(source, fn.span[0])
                    where = f"  (line {line})"
                print(f"  {fn.name}({params}){where}")
    else:
        for entity in index.entities:
            print(f"  {entity.kind.value} {entity.name}: {len(entity.methods)} functions")
    return EXIT_OK


def _config_from(args: argparse.Namespace) -> RunConfig:
    # Optional config file first; explicit flags win.
    if getattr(args, "config", None):
        config = RunConfig.from_file(args.config)
    else:
        config = RunConfig()
    if getattr(args, "lang", None):
        config.language = Language(args.lang)
    if getattr(args, "embedder", None):
        config.embedder = args.embedder
    if getattr(args, "llm", None):
        config.llm = args.llm
    if getattr(args, "k", None) is not None:
        config.k = args.k
    if getattr(args, "budget", None) is not None:
        config.token_budget = args.budget
    if getattr(args, "cache_dir", None):
        config.cache_dir = args.cache_dir
    if getattr(args, "exclude", None):
        config.exclude_globs = tuple(args.exclude)
    if getattr(args, "model", None):
        config.model = args.model
    if getattr(args, "max_calls", None) is not None:
        config.max_calls = args.max_calls
    if getattr(args, "include_cached_latency", False):
        config.include_cached_latency = True
    return config


def _add_backend_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="optional JSON config file; flags win")
    parser.add_argument("--embedder", choices=["hash", "remote"])
    parser.add_argument("--llm", choices=["mock", "remote"])
    parser.add_argument("--model", help="remote model identifier")
    parser.add_argument("--k", type=int, help="candidates per completion (default 10)")
    parser.add_argument("--budget", type=int, help="prompt token budget (default 3000)")
    parser.add_argument("--cache-dir", dest="cache_dir")
    parser.add_argument("--max-calls", dest="max_calls", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lancekit",
        description="Project-aware API completion: index a repository, rank "
        "candidate signatures, complete calls, and evaluate completions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="extract API metadata from a repository")
    p_index.add_argument("root")
    p_index.add_argument("--lang", required=True, choices=[l.value for l in Language])
    p_index.add_argument("--out", required=True)
    p_index.add_argument("--exclude", action="append", default=[])
    _add_backend_flags(p_index)
    p_index.set_defaults(handler=cmd_index)

    p_complete = sub.add_parser("complete", help="predict one API call")
    complete_sub = p_complete.add_subparsers(dest="complete_mode", required=True)
    p_token = complete_sub.add_parser("token", help="complete after `receiver.`")
    p_token.add_argument("--index", required=True)
    p_token.add_argument("--file", required=True)
    p_token.add_argument("--cursor", type=int, required=True)
    p_token.add_argument("--explain", action="store_true")
    _add_backend_flags(p_token)
    p_token.set_defaults(handler=cmd_complete)
    p_query = complete_sub.add_parser("query", help="complete from a developer query")
    p_query.add_argument("--index", required=True)
    p_query.add_argument("--query", required=True)
    p_query.add_argument("--file")
    p_query.add_argument("--explain", action="store_true")
    _add_backend_flags(p_query)
    p_query.set_defaults(handler=cmd_complete)

    p_eval = sub.add_parser("eval", help="run benchmark tasks and report metrics")
    p_eval.add_argument("--index", required=True)
    p_eval.add_argument("--tasks", required=True)
    p_eval.add_argument("--mode", choices=["token", "conversational", "all"], default="all")
    p_eval.add_argument("--report", required=True)
    p_eval.add_argument("--csv")
    p_eval.add_argument(
        "--include-cached-latency",
        dest="include_cached_latency",
        action="store_true",
        help="count cache hits in mean latency",
    )
    _add_backend_flags(p_eval)
    p_eval.set_defaults(handler=cmd_eval)

    p_inspect = sub.add_parser("inspect", help="summarize a saved index")
    p_inspect.add_argument("--index", required=True)
    p_inspect.add_argument("--entity")
    p_inspect.set_defaults(handler=cmd_inspect)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (ServiceError, AuthError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SERVICE
    except LancekitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
