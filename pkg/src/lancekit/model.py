"""Domain model for extracted API metadata and index (de)serialization.

The index file is UTF-8 JSONL: one header record followed by one record per
function, entity, and import binding. Records are discriminated by their
`kind` field ("function" for functions, "class"/"module" for entities,
"module_alias"/"entity_import"/"wildcard" for imports).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import IoError, SchemaError

SCHEMA_VERSION = 1

# (file, span_start, span_end) — unique per function within one index.
FunctionKey = tuple[str, int, int]


class Visibility(str, Enum):
    PUBLIC = "public"
    PRIVATE = "private"
    PROTECTED = "protected"
    PACKAGE = "package"
    UNSPECIFIED = "unspecified"


class Language(str, Enum):
    PYTHON = "python"
    JAVA = "java"

    @property
    def extension(self) -> str:
        return ".py" if self is Language.PYTHON else ".java"


class EntityKind(str, Enum):
    CLASS = "class"
    MODULE = "module"


class BindingKind(str, Enum):
    MODULE_ALIAS = "module_alias"
    ENTITY_IMPORT = "entity_import"
    WILDCARD = "wildcard"


@dataclass(frozen=True)
class Parameter:
    name: str
    declared_type: str | None = None
    comment: str | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("parameter name must be non-empty")


@dataclass(frozen=True)
class ApiFunction:
    name: str
    visibility: Visibility
    parameters: tuple[Parameter, ...]
    comment: str | None
    return_type: str | None
    owner_entity: str | None
    file: str
    span: tuple[int, int]

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("function name must be non-empty")
        if self.span[0] >= self.span[1]:
            raise ValueError(f"empty span for {self.name}: {self.span}")

    @property
    def key(self) -> FunctionKey:
        return (self.file, self.span[0], self.span[1])

    @property
    def qualified_name(self) -> str:
        return f"{self.owner_entity}.{self.name}" if self.owner_entity else self.name


@dataclass(frozen=True)
class EntityRecord:
    name: str
    kind: EntityKind
    supertypes: tuple[str, ...]
    comment: str | None
    file: str
    methods: tuple[FunctionKey, ...]

    def __post_init__(self) -> None:
        if self.kind is EntityKind.MODULE and self.supertypes:
            raise ValueError(f"module entity {self.name} cannot have supertypes")


@dataclass(frozen=True)
class ImportBinding:
    local_name: str
    target: str
    kind: BindingKind
    file: str
    relative: bool = False

    def __post_init__(self) -> None:
        if not self.local_name and self.kind is not BindingKind.WILDCARD:
            raise ValueError("only wildcard bindings may have an empty local name")


@dataclass(frozen=True)
class RepoIndex:
    repo_root: str
    language: Language
    functions: tuple[ApiFunction, ...]
    entities: tuple[EntityRecord, ...]
    imports_by_file: dict[str, tuple[ImportBinding, ...]]
    created_at: str
    schema_version: int = SCHEMA_VERSION
    skipped_files: tuple[str, ...] = ()

    def functions_of(self, owner: str) -> list[ApiFunction]:
        """Functions owned by a module or entity, in declaration order."""
        return [f for f in self.functions if f.owner_entity == owner]

    def function_by_key(self, key: FunctionKey) -> ApiFunction | None:
        return self._key_map.get(key)

    def entity_by_name(self, name: str, file: str | None = None) -> EntityRecord | None:
        """Entity lookup by name; prefers a file match when names collide."""
        hits = [e for e in self.entities if e.name == name]
        if not hits:
            return None
        if file is not None:
            for e in hits:
                if e.file == file:
                    return e
        return hits[0]

    @property
    def _key_map(self) -> dict[FunctionKey, ApiFunction]:
        cached = getattr(self, "_key_map_cache", None)
        if cached is None:
            cached = {f.key: f for f in self.functions}
            object.__setattr__(self, "_key_map_cache", cached)
        return cached


def validate_index(index: RepoIndex) -> None:
    """Check cross-record invariants; raises SchemaError on the first failure."""
    seen: set[FunctionKey] = set()
    for fn in index.functions:
        if fn.key in seen:
            raise SchemaError(f"duplicate function span {fn.key}")
        seen.add(fn.key)
    for entity in index.entities:
        for key in entity.methods:
            if key not in seen:
                raise SchemaError(
                    f"entity {entity.name} references unknown function {key}"
                )
    for file, bindings in index.imports_by_file.items():
        for binding in bindings:
            if binding.file != file:
                raise SchemaError(
                    f"import binding {binding.local_name!r} filed under {file!r} "
                    f"but records file {binding.file!r}"
                )


def _function_record(fn: ApiFunction) -> dict:
    return {
        "kind": "function",
        "name": fn.name,
        "visibility": fn.visibility.value,
        "params": [
            {"name": p.name, "declared_type": p.declared_type, "comment": p.comment}
            for p in fn.parameters
        ],
        "comment": fn.comment,
        "return_type": fn.return_type,
        "owner": fn.owner_entity,
        "file": fn.file,
        "span_start": fn.span[0],
        "span_end": fn.span[1],
    }


def _entity_record(entity: EntityRecord) -> dict:
    return {
        "kind": entity.kind.value,
        "name": entity.name,
        "supertypes": list(entity.supertypes),
        "comment": entity.comment,
        "file": entity.file,
        "methods": [list(key) for key in entity.methods],
    }


def _import_record(binding: ImportBinding) -> dict:
    record = {
        "kind": binding.kind.value,
        "name": binding.local_name,
        "target": binding.target,
        "file": binding.file,
    }
    if binding.relative:
        record["relative"] = True
    return record


def save_index(index: RepoIndex, destination: str | Path) -> None:
    destination = Path(destination)
    header = {
        "kind": "header",
        "repo_root": index.repo_root,
        "language": index.language.value,
        "schema_version": index.schema_version,
        "created_at": index.created_at,
        "skipped_files": list(index.skipped_files),
    }
    lines = [json.dumps(header, ensure_ascii=False)]
    for fn in index.functions:
        lines.append(json.dumps(_function_record(fn), ensure_ascii=False))
    for entity in index.entities:
        lines.append(json.dumps(_entity_record(entity), ensure_ascii=False))
    for file in index.imports_by_file:
        for binding in index.imports_by_file[file]:
            lines.append(json.dumps(_import_record(binding), ensure_ascii=False))
    try:
        destination.parent.mkdir(parents=True, exist_ok=True)
        destination.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write index to {destination}: {exc}") from exc


def _parse_function(record: dict, line: int) -> ApiFunction:
    try:
        params = tuple(
            Parameter(p["name"], p.get("declared_type"), p.get("comment"))
            for p in record["params"]
        )
        return ApiFunction(
            name=record["name"],
            visibility=Visibility(record["visibility"]),
            parameters=params,
            comment=record.get("comment"),
            return_type=record.get("return_type"),
            owner_entity=record.get("owner"),
            file=record["file"],
            span=(record["span_start"], record["span_end"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad function record: {exc}", line=line) from exc


def _parse_entity(record: dict, line: int) -> EntityRecord:
    try:
        return EntityRecord(
            name=record["name"],
            kind=EntityKind(record["kind"]),
            supertypes=tuple(record.get("supertypes", [])),
            comment=record.get("comment"),
            file=record["file"],
            methods=tuple((m[0], m[1], m[2]) for m in record.get("methods", [])),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise SchemaError(f"bad entity record: {exc}", line=line) from exc


def _parse_import(record: dict, line: int) -> ImportBinding:
    try:
        return ImportBinding(
            local_name=record["name"],
            target=record["target"],
            kind=BindingKind(record["kind"]),
            file=record["file"],
            relative=bool(record.get("relative", False)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"bad import record: {exc}", line=line) from exc


def load_index(source: str | Path) -> RepoIndex:
    source = Path(source)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read index from {source}: {exc}") from exc

    # Split on "\n" only: json never escapes U+0085/U+2028-style line
    # separators, so splitlines() would shear records apart.
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SchemaError("empty index file", line=1)

    def parse_line(raw: str, line_no: int) -> dict:
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed record: {exc.msg}", line=line_no) from exc
        if not isinstance(record, dict) or "kind" not in record:
            raise SchemaError("record is not an object with a 'kind' field", line=line_no)
        return record

    header = parse_line(lines[0], 1)
    if header["kind"] != "header":
        raise SchemaError("first record must be the header", line=1)
    version = header.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported schema_version {version!r} (supported: {SCHEMA_VERSION})", line=1
        )
    try:
        language = Language(header["language"])
        repo_root = header["repo_root"]
        created_at = header["created_at"]
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"bad header: {exc}", line=1) from exc

    functions: list[ApiFunction] = []
    entities: list[EntityRecord] = []
    imports_by_file: dict[str, list[ImportBinding]] = {}
    for line_no, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            raise SchemaError("blank record line", line=line_no)
        record = parse_line(raw, line_no)
        kind = record["kind"]
        if kind == "function":
            functions.append(_parse_function(record, line_no))
        elif kind in (EntityKind.CLASS.value, EntityKind.MODULE.value):
            entities.append(_parse_entity(record, line_no))
        elif kind in tuple(b.value for b in BindingKind):
            binding = _parse_import(record, line_no)
            imports_by_file.setdefault(binding.file, []).append(binding)
        else:
            raise SchemaError(f"unknown record kind {kind!r}", line=line_no)

    index = RepoIndex(
        repo_root=repo_root,
        language=language,
        functions=tuple(functions),
        entities=tuple(entities),
        imports_by_file={f: tuple(bs) for f, bs in imports_by_file.items()},
        created_at=created_at,
        schema_version=version,
        skipped_files=tuple(header.get("skipped_files", [])),
    )
    validate_index(index)
    return index
