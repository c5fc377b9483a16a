"""Repository walker: turns source trees into RepoIndex records.

One adapter per language maps that language's node kinds onto the shared
extraction rules; the traversal skeleton itself is language-agnostic.
"""

from __future__ import annotations

import fnmatch
import logging
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from .errors import EmptyRepoError, IoError
from .model import (
    ApiFunction,
    BindingKind,
    EntityKind,
    EntityRecord,
    ImportBinding,
    Language,
    Parameter,
    RepoIndex,
    Visibility,
    validate_index,
)
from .syntax import SourceParseError, SyntaxNode, SyntaxTree, parse_source

logger = logging.getLogger(__name__)

DEFAULT_EXCLUDES = (
    "**/.git/**",
    "**/__pycache__/**",
    "**/node_modules/**",
    "**/target/**",
    "**/dist/**",
    "**/vendor/**",
)


@dataclass(frozen=True)
class LanguageAdapter:
    """Node-kind tables driving the shared extraction walk."""

    language: Language
    function_kinds: frozenset[str]
    entity_kinds: frozenset[str]
    import_kinds: frozenset[str]
    parameter_kind: str
    has_module_entities: bool


PYTHON_ADAPTER = LanguageAdapter(
    language=Language.PYTHON,
    function_kinds=frozenset({"function_definition"}),
    entity_kinds=frozenset({"class_definition"}),
    import_kinds=frozenset({"import_statement", "import_from_statement"}),
    parameter_kind="parameter",
    has_module_entities=True,
)

JAVA_ADAPTER = LanguageAdapter(
    language=Language.JAVA,
    function_kinds=frozenset({"method_declaration", "constructor_declaration"}),
    entity_kinds=frozenset(
        {"class_declaration", "interface_declaration", "enum_declaration"}
    ),
    import_kinds=frozenset({"import_declaration"}),
    parameter_kind="formal_parameter",
    has_module_entities=False,
)

ADAPTERS = {Language.PYTHON: PYTHON_ADAPTER, Language.JAVA: JAVA_ADAPTER}


def module_name_for(file: str) -> str:
    """Dotted module path for a repo-relative source file."""
    path = Path(file)
    parts = [p for p in path.parent.parts if p != "."]
    stem = path.stem
    if stem != "__init__":
        parts.append(stem)
    return ".".join(parts) if parts else stem


@dataclass
class _Walk:
    """Mutable state threaded through one file's extraction pass."""

    adapter: LanguageAdapter
    file: str
    functions: list[ApiFunction] = field(default_factory=list)
    entities: list[tuple[SyntaxNode, str]] = field(default_factory=list)
    imports: list[ImportBinding] = field(default_factory=list)
    visited: int = 0


def _visibility(node: SyntaxNode, inside_function: bool) -> Visibility:
    declared = node.fields.get("visibility")
    if declared:
        return Visibility(declared)
    # Languages without access modifiers at this site: nested functions are
    # lexically inaccessible, everything else is left unspecified.
    return Visibility.PRIVATE if inside_function else Visibility.UNSPECIFIED


def _parameters(node: SyntaxNode, adapter: LanguageAdapter) -> tuple[Parameter, ...]:
    return tuple(
        Parameter(
            name=child.fields["name"],
            declared_type=child.fields.get("type"),
            comment=child.fields.get("comment"),
        )
        for child in node.children_by_kind(adapter.parameter_kind)
    )


def _doc(node: SyntaxNode) -> str | None:
    comment = node.child_by_kind("comment")
    return comment.text if comment is not None else None


def _relative_import_target(file: str, level: int, target: str) -> str:
    package_parts = [p for p in Path(file).parent.parts if p != "."]
    climb = level - 1
    base = package_parts[: len(package_parts) - climb] if climb else package_parts
    prefix = ".".join(base)
    if prefix and target:
        return f"{prefix}.{target}"
    return prefix or target


def _walk(
    walk: _Walk,
    node: SyntaxNode,
    owner: str | None,
    entity_prefix: str | None,
    inside_function: bool,
) -> None:
    walk.visited += 1
    adapter = walk.adapter

    if node.kind in adapter.function_kinds:
        walk.functions.append(
            ApiFunction(
                name=node.fields["name"],
                visibility=_visibility(node, inside_function),
                parameters=_parameters(node, adapter),
                comment=_doc(node),
                return_type=node.fields.get("return_type"),
                owner_entity=owner,
                file=walk.file,
                span=(node.start, node.end),
            )
        )
        for child in node.children:
            _walk(walk, child, owner, entity_prefix, inside_function=True)
        return

    if node.kind in adapter.entity_kinds:
        name = node.fields["name"]
        qualified = f"{entity_prefix}.{name}" if entity_prefix else name
        walk.entities.append((node, qualified))
        for child in node.children:
            _walk(walk, child, qualified, qualified, inside_function)
        return

    if node.kind in adapter.import_kinds:
        level = int(node.fields.get("level") or 0)
        for binding_node in node.children_by_kind("import_binding"):
            walk.visited += 1
            target = binding_node.fields["target"] or ""
            relative = level > 0
            if relative:
                target = _relative_import_target(walk.file, level, target)
            walk.imports.append(
                ImportBinding(
                    local_name=binding_node.fields["local"] or "",
                    target=target,
                    kind=BindingKind(binding_node.fields["bind"]),
                    file=walk.file,
                    relative=relative,
                )
            )
        return

    for child in node.children:
        _walk(walk, child, owner, entity_prefix, inside_function)


def extract_functions(tree: SyntaxTree, file: str, language: Language) -> list[ApiFunction]:
    """All function/method declarations in one parsed file, declaration order."""
    walk = _run_walk(tree, file, language)
    return walk.functions


def extract_imports(tree: SyntaxTree, file: str, language: Language) -> list[ImportBinding]:
    """All import bindings declared in one parsed file, declaration order."""
    walk = _run_walk(tree, file, language)
    return walk.imports


def extract_entities(
    tree: SyntaxTree, file: str, language: Language
) -> list[EntityRecord]:
    """Class (and for Python, module) entities with their method references."""
    walk = _run_walk(tree, file, language)
    return _entities_from_walk(walk, tree, file)


def _run_walk(tree: SyntaxTree, file: str, language: Language) -> _Walk:
    adapter = ADAPTERS[language]
    walk = _Walk(adapter=adapter, file=file)
    owner = module_name_for(file) if adapter.has_module_entities else None
    _walk(walk, tree.root, owner, None, inside_function=False)
    return walk


def _entities_from_walk(walk: _Walk, tree: SyntaxTree, file: str) -> list[EntityRecord]:
    adapter = walk.adapter
    entities: list[EntityRecord] = []
    if adapter.has_module_entities:
        module = module_name_for(file)
        entities.append(
            EntityRecord(
                name=module,
                kind=EntityKind.MODULE,
                supertypes=(),
                comment=_doc(tree.root),
                file=file,
                methods=tuple(f.key for f in walk.functions if f.owner_entity == module),
            )
        )
    for node, qualified in walk.entities:
        entities.append(
            EntityRecord(
                name=qualified,
                kind=EntityKind.CLASS,
                supertypes=tuple(
                    s.text for s in node.children_by_kind("supertype") if s.text
                ),
                comment=_doc(node),
                file=file,
                methods=tuple(
                    f.key for f in walk.functions if f.owner_entity == qualified
                ),
            )
        )
    return entities


def visit_count(tree: SyntaxTree, file: str, language: Language) -> int:
    """Number of nodes the extraction walk visits (for traversal audits)."""
    return _run_walk(tree, file, language).visited


def _candidate_files(
    root: Path, language: Language, exclude_globs: tuple[str, ...]
) -> list[str]:
    files = []
    for path in sorted(root.rglob(f"*{language.extension}")):
        if not path.is_file():
            continue
        rel = path.relative_to(root).as_posix()
        if any(fnmatch.fnmatch(rel, glob) or fnmatch.fnmatch("/" + rel, glob) for glob in exclude_globs):
            continue
        files.append(rel)
    return files


def index_repository(
    root: str | Path,
    language: Language | str,
    exclude_globs: tuple[str, ...] = DEFAULT_EXCLUDES,
) -> RepoIndex:
    """Parse every source file of `language` under `root` into one RepoIndex.

    Files that fail to parse are recorded as skipped and do not abort the run.
    """
    language = Language(language)
    root = Path(root)
    if not root.is_dir():
        raise IoError(f"repository root {root} does not exist or is not a directory")

    files = _candidate_files(root, language, exclude_globs)
    if not files:
        raise EmptyRepoError(f"no {language.value} files under {root}")

    functions: list[ApiFunction] = []
    entities: list[EntityRecord] = []
    imports_by_file: dict[str, tuple[ImportBinding, ...]] = {}
    skipped: list[str] = []
    for rel in files:
        try:
            content = (root / rel).read_text(encoding="utf-8")
        except (OSError, UnicodeDecodeError) as exc:
            logger.warning("skipping unreadable file %s: %s", rel, exc)
            skipped.append(rel)
            continue
        try:
            tree = parse_source(content, language)
        except SourceParseError as exc:
            logger.warning("skipping unparseable file %s: %s", rel, exc)
            skipped.append(rel)
            continue
        except Exception as exc:  # noqa: BLE001 - best-effort walk, skip and keep going
            logger.warning(
                "skipping %s after unexpected parser error %s: %s",
                rel,
                type(exc).__name__,
                exc,
            )
            skipped.append(rel)
            continue
        walk = _run_walk(tree, rel, language)
        functions.extend(walk.functions)
        entities.extend(_entities_from_walk(walk, tree, rel))
        if walk.imports:
            imports_by_file[rel] = tuple(walk.imports)

    functions.sort(key=lambda f: (f.file, f.span[0]))
    entities.sort(key=lambda e: (e.file, e.name))
    index = RepoIndex(
        repo_root=str(root),
        language=language,
        functions=tuple(functions),
        entities=tuple(entities),
        imports_by_file=dict(sorted(imports_by_file.items())),
        created_at=datetime.now(timezone.utc).isoformat(),
        skipped_files=tuple(skipped),
    )
    validate_index(index)
    return index
