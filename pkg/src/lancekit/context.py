"""Completion-context assembly: cursor-site analysis, receiver resolution,
and candidate ranking for both completion modes.

Site analysis is lexical (regular expressions over the text before the
cursor), not dataflow: identifiers and declared types are collected in the
order they appear in the enclosing function.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .embed import EmbeddingVector
from .errors import (
    EmptyModuleError,
    NoEntitiesError,
    ParseSiteError,
    QueryParseError,
    UnresolvedReceiverError,
)
from .extract import module_name_for
from .model import ApiFunction, Language, RepoIndex, Visibility
from .vindex import PAYLOAD_ENTITY, VectorIndex, quantize_similarity, query_topk

TOKEN_MODE = "token"
CONVERSATIONAL_MODE = "conversational"

_RECEIVER_RE = re.compile(r"([A-Za-z_]\w*(?:\.[A-Za-z_]\w*)*)\.\Z")
_TRAILING_IDENT_RE = re.compile(r"([A-Za-z_]\w*)\s*\Z")

# Words carrying no operation signal in developer queries. Deliberately short:
# over-stripping loses operation words ("do the thing" keeps all three).
_STOP_WORDS = frozenset(
    {
        "how", "to", "with", "using", "via", "a", "an", "i", "in", "for",
        "of", "on", "at", "my", "me", "we", "you", "your", "can", "could",
        "would", "should", "please", "want", "need", "is", "way", "what",
    }
)

_JAVA_STMT_KEYWORDS = frozenset(
    {"if", "for", "while", "switch", "catch", "return", "throw", "new", "else", "do", "try", "assert", "case", "break", "continue"}
)


@dataclass
class TokenSite:
    content: str
    cursor: int
    receiver: str
    assignment_identifier: str | None
    in_scope_variables: list[str]
    declared_types: dict[str, str] = field(default_factory=dict)
    language: Language = Language.PYTHON


@dataclass(frozen=True)
class ConversationalQuery:
    raw: str
    entity_hint: str | None = None
    operation_hint: str | None = None

    def __post_init__(self) -> None:
        if not self.raw.strip():
            raise ValueError("query text must be non-empty")


@dataclass
class CompletionContext:
    mode: str
    resolved_module: str | None
    candidates: list[tuple[ApiFunction, float]]
    local_cues: list[str]
    truncated: bool
    owner_alias: str | None = None


def _dot(a: EmbeddingVector, b: EmbeddingVector) -> float:
    total = 0.0
    for x, y in zip(a.values, b.values):
        total += x * y
    return quantize_similarity(total)


# -- next-token site analysis ------------------------------------------------


def analyze_token_site(content: str, cursor: int, language: Language | str) -> TokenSite:
    language = Language(language)
    source = content.encode("utf-8")
    if cursor < 1 or cursor > len(source):
        raise ParseSiteError(f"cursor {cursor} outside content of {len(source)} bytes")
    try:
        prefix = source[:cursor].decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseSiteError(f"cursor {cursor} splits a multi-byte character") from exc

    match = _RECEIVER_RE.search(prefix)
    if match is None:
        raise ParseSiteError(
            f"cursor {cursor} is not immediately after an `identifier.` chain"
        )
    receiver = match.group(1)

    line_start = prefix.rfind("\n") + 1
    before_receiver = prefix[line_start : match.start(1)]
    assignment_identifier = _assignment_identifier(before_receiver, language)

    in_scope, declared = _scan_scope(prefix, line_start, language)
    return TokenSite(
        content=content,
        cursor=cursor,
        receiver=receiver,
        assignment_identifier=assignment_identifier,
        in_scope_variables=in_scope,
        declared_types=declared,
        language=language,
    )


def _assignment_identifier(before_receiver: str, language: Language) -> str | None:
    segment = before_receiver.rstrip()
    if not segment.endswith("="):
        return None
    if len(segment) >= 2 and segment[-2] in "=<>!+-*/%&|^":
        return None
    lhs = segment[:-1].rstrip()
    if language is Language.PYTHON and ":" in lhs:
        lhs = lhs.split(":", 1)[0].rstrip()
    match = _TRAILING_IDENT_RE.search(lhs)
    return match.group(1) if match else None


def _split_params(decl: str) -> list[str]:
    """Split a parameter list at top-level commas (brackets/generics nest)."""
    parts: list[str] = []
    depth = 0
    current = ""
    for ch in decl:
        if ch in "([{<":
            depth += 1
        elif ch in ")]}>":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(current.strip())
            current = ""
        else:
            current += ch
    if current.strip():
        parts.append(current.strip())
    return parts


def _scan_scope(
    prefix: str, cursor_line_start: int, language: Language
) -> tuple[list[str], dict[str, str]]:
    lines = prefix[:cursor_line_start].split("\n")
    cursor_line = prefix[cursor_line_start:]
    scope_start = 0
    header: str | None = None

    if language is Language.PYTHON:
        cur_indent = len(cursor_line) - len(cursor_line.lstrip())
        for i in range(len(lines) - 1, -1, -1):
            m = re.match(r"^(\s*)(?:async\s+)?def\s", lines[i])
            if m and len(m.group(1)) < cur_indent:
                scope_start = i
                header = lines[i]
                break
    else:
        for i in range(len(lines) - 1, -1, -1):
            line = lines[i]
            stripped = line.strip()
            first_word = re.match(r"[A-Za-z_]\w*", stripped)
            if (
                "(" in line
                and re.search(r"\)\s*\{\s*$", line)
                and first_word
                and first_word.group(0) not in _JAVA_STMT_KEYWORDS
                and first_word.group(0) not in ("class", "interface", "enum")
            ):
                scope_start = i
                header = lines[i]
                break

    in_scope: list[str] = []
    declared: dict[str, str] = {}

    def add(name: str, type_text: str | None = None) -> None:
        if name and name not in in_scope:
            in_scope.append(name)
        if name and type_text:
            declared[name] = type_text.strip()

    if header:
        m = re.search(r"\(([^)]*)\)", header)
        if m:
            for param in _split_params(m.group(1)):
                if language is Language.PYTHON:
                    name_part, _, type_part = param.partition(":")
                    name = re.sub(r"^[*]+", "", name_part.strip())
                    type_text = type_part.split("=")[0].strip() or None
                    if re.fullmatch(r"[A-Za-z_]\w*", name):
                        add(name, type_text)
                else:
                    tokens = param.replace("...", " ").split()
                    tokens = [t for t in tokens if t != "final"]
                    if len(tokens) >= 2 and re.fullmatch(r"[A-Za-z_]\w*", tokens[-1]):
                        add(tokens[-1], " ".join(tokens[:-1]))

    scope_lines = lines[scope_start:] + [cursor_line]
    for line in scope_lines:
        if language is Language.PYTHON:
            m = re.match(r"^\s*([A-Za-z_]\w*)\s*(?::\s*([^=]+?))?\s*=(?![=<>])", line)
            if m:
                add(m.group(1), m.group(2))
            for m in re.finditer(r"^\s*(?:async\s+)?for\s+([A-Za-z_]\w*)", line):
                add(m.group(1))
            for m in re.finditer(r"\bas\s+([A-Za-z_]\w*)", line):
                add(m.group(1))
        else:
            m = re.match(
                r"^\s*(?:final\s+)?([A-Za-z_][\w.]*(?:<[^>]*>)?(?:\[\])*)\s+"
                r"([A-Za-z_]\w*)\s*[=;]",
                line,
            )
            if m and m.group(1) not in _JAVA_STMT_KEYWORDS:
                add(m.group(2), m.group(1))
                continue
            m = re.match(r"^\s*([A-Za-z_]\w*)\s*=(?!=)", line)
            if m:
                add(m.group(1))
    return in_scope, declared


# -- receiver resolution -------------------------------------------------------


def _canonical_owner(index: RepoIndex, target: str) -> str:
    if index.entity_by_name(target) is not None:
        return target
    if "." in target:
        prefix, last = target.rsplit(".", 1)
        for entity in index.entities:
            if entity.name != last:
                continue
            file_module = module_name_for(entity.file)
            if file_module in (target, prefix):
                return last
        if index.entity_by_name(last) is not None:
            return last
    return target


def resolve_receiver(site: TokenSite, index: RepoIndex, file: str) -> str:
    """Receiver -> qualified owner: import bindings first, then typed locals."""
    bindings = index.imports_by_file.get(file, ())
    parts = site.receiver.split(".")
    for cut in range(len(parts), 0, -1):
        head = ".".join(parts[:cut])
        for binding in bindings:
            if binding.local_name == head:
                rest = parts[cut:]
                target = ".".join([binding.target, *rest]) if rest else binding.target
                return _canonical_owner(index, target)

    declared = site.declared_types.get(site.receiver)
    if declared:
        base = re.match(r"[A-Za-z_][\w.]*", declared)
        if base:
            name = base.group(0)
            owner = _canonical_owner(index, name)
            if index.entity_by_name(owner) is not None:
                return owner
    raise UnresolvedReceiverError(site.receiver, list(bindings))


# -- candidate ranking ---------------------------------------------------------


def _completion_candidates(index: RepoIndex, owner: str) -> list[ApiFunction]:
    return [
        f for f in index.functions_of(owner) if f.visibility is not Visibility.PRIVATE
    ]


def _score_by_probe(
    functions: list[ApiFunction], probe_text: str, vindex: VectorIndex
) -> list[tuple[ApiFunction, float]]:
    probe = vindex.embedder.embed(probe_text)
    scored = []
    for fn in functions:
        vector = vindex.vector_for_function(fn.key)
        scored.append((fn, _dot(probe, vector) if vector is not None else 0.0))
    scored.sort(key=lambda pair: (-pair[1], pair[0].qualified_name))
    return scored


def rank_token_candidates(
    module: str,
    site: TokenSite,
    index: RepoIndex,
    vindex: VectorIndex,
    k: int = 10,
) -> CompletionContext:
    functions = _completion_candidates(index, module)
    if not functions:
        raise EmptyModuleError(f"{module} owns no completion candidates")

    identifier = site.assignment_identifier
    if identifier:
        scored = _score_by_probe(functions, identifier, vindex)
    else:
        scored = [(fn, 0.0) for fn in functions]

    cues = [identifier] if identifier else []
    cues.extend(v for v in site.in_scope_variables if v not in cues)
    return CompletionContext(
        mode=TOKEN_MODE,
        resolved_module=module,
        candidates=scored[:k],
        local_cues=cues,
        truncated=len(scored) > k,
        owner_alias=site.receiver,
    )


# -- conversational mode ---------------------------------------------------------


def _heuristic_parse(raw: str) -> tuple[str, str]:
    words = re.findall(r"[A-Za-z_][A-Za-z0-9_]*", raw)
    capitalized = [w for w in words if w[0].isupper()]
    entity = max(capitalized, key=len) if capitalized else ""
    operation_words = [
        w for w in words if w != entity and w.lower() not in _STOP_WORDS
    ]
    operation = " ".join(operation_words)
    if not operation and not entity:
        operation = " ".join(words)
    return entity, operation


def _parse_labeled_reply(reply: str) -> tuple[str, str] | None:
    entity = operation = None
    for line in reply.splitlines():
        lowered = line.strip().lower()
        if lowered.startswith("entity:"):
            entity = line.split(":", 1)[1].strip()
        elif lowered.startswith("operation:"):
            operation = line.split(":", 1)[1].strip()
    if entity is None and operation is None:
        return None
    entity = "" if entity in (None, "NONE", "none") else entity
    operation = "" if operation is None or operation.lower() == "none" else operation
    return entity, operation


@dataclass(frozen=True)
class _ParsePrompt:
    system_text: str
    user_text: str
    calls: tuple = ()


def parse_query(query: ConversationalQuery | str, llm=None) -> tuple[str, str]:
    """Extract (entity, operation) from a developer query, via the language
    model when one is wired in, falling back to a lexical heuristic."""
    raw = query.raw if isinstance(query, ConversationalQuery) else query
    if not raw.strip():
        raise QueryParseError("empty query")

    parsed: tuple[str, str] | None = None
    if llm is not None and getattr(llm, "id", "mock") != "mock":
        prompt = _ParsePrompt(
            system_text=(
                "You split developer requests into a code entity and an operation."
            ),
            user_text=(
                "Request: "
                + raw
                + "\nReply with exactly two lines:\nENTITY: <entity name or NONE>"
                + "\nOPERATION: <operation phrase or NONE>"
            ),
        )
        try:
            parsed = _parse_labeled_reply(llm.complete(prompt).text)
        except Exception:
            parsed = None
    if parsed is None:
        parsed = _heuristic_parse(raw)

    entity, operation = parsed
    if not entity and not operation:
        raise QueryParseError(f"nothing extractable from query {raw!r}")
    return entity, operation


def match_entity(entity: str, vindex: VectorIndex, k: int = 10) -> list[tuple[str, float]]:
    """Rank indexed entities against the named entity by embedding similarity."""
    if not entity:
        raise ValueError("entity text must be non-empty")
    if not any(e.payload == PAYLOAD_ENTITY for e in vindex.entries):
        raise NoEntitiesError("vector index has no entity entries")
    probe = vindex.embedder.embed(entity)
    return query_topk(vindex, probe, k, kind_filter=PAYLOAD_ENTITY)


def _entity_record_for_key(index: RepoIndex, vindex: VectorIndex, key: str):
    base = key.split("#", 1)[0]
    file = vindex.entity_files.get(key)
    return index.entity_by_name(base, file=file)


def rank_conversational_candidates(
    entity_keys: list[tuple[str, float]] | list[str],
    operation: str,
    index: RepoIndex,
    vindex: VectorIndex,
    k: int = 10,
) -> CompletionContext:
    """Score the top entity's methods against the operation; methods of
    lower-ranked entities follow unscored, preserving entity rank."""
    if not entity_keys:
        raise ValueError("entity_keys must be non-empty")
    keys = [key if isinstance(key, str) else key[0] for key in entity_keys]

    ordered: list[tuple[ApiFunction, float]] = []
    for rank_position, key in enumerate(keys):
        record = _entity_record_for_key(index, vindex, key)
        if record is None:
            continue
        methods = [index.function_by_key(m) for m in record.methods]
        methods = [
            m for m in methods if m is not None and m.visibility is not Visibility.PRIVATE
        ]
        if rank_position == 0 and operation:
            ordered.extend(_score_by_probe(methods, operation, vindex))
        else:
            ordered.extend((m, 0.0) for m in methods)

    if not ordered:
        raise EmptyModuleError(f"no candidates under entities {keys!r}")
    return CompletionContext(
        mode=CONVERSATIONAL_MODE,
        resolved_module=keys[0],
        candidates=ordered[:k],
        local_cues=[operation] if operation else [],
        truncated=len(ordered) > k,
    )


def alias_for_owner(index: RepoIndex, file: str | None, owner: str) -> str | None:
    """Local alias a file uses for an owner module/entity, if any."""
    if file is None:
        return None
    for binding in index.imports_by_file.get(file, ()):
        if binding.target == owner or binding.target.rsplit(".", 1)[-1] == owner:
            return binding.local_name or None
    return None


# -- end-to-end context assembly (shared by the CLI and the eval harness) ------


def token_completion_context(
    index: RepoIndex,
    vindex: VectorIndex,
    file: str,
    content: str,
    cursor: int,
    k: int = 10,
) -> CompletionContext:
    """Site analysis + resolution + ranking; degrades to entity matching on
    the receiver text when imports and typed locals both miss."""
    site = analyze_token_site(content, cursor, index.language)
    try:
        module = resolve_receiver(site, index, file)
        return rank_token_candidates(module, site, index, vindex, k=k)
    except (UnresolvedReceiverError, EmptyModuleError):
        entity_keys = match_entity(site.receiver, vindex, k=k)
        context = rank_conversational_candidates(
            entity_keys, site.assignment_identifier or "", index, vindex, k=k
        )
        context.mode = TOKEN_MODE
        context.owner_alias = site.receiver
        return context


def query_completion_context(
    index: RepoIndex,
    vindex: VectorIndex,
    raw_query: str,
    llm=None,
    file: str | None = None,
    k: int = 10,
) -> CompletionContext:
    entity, operation = parse_query(ConversationalQuery(raw=raw_query), llm)
    probe = entity if entity else operation
    entity_keys = match_entity(probe, vindex, k=k)
    context = rank_conversational_candidates(entity_keys, operation, index, vindex, k=k)
    if context.candidates and file is not None:
        top_owner = context.candidates[0][0].owner_entity
        if top_owner:
            context.owner_alias = alias_for_owner(index, file, top_owner)
    return context
