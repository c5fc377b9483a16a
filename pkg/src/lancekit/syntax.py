"""Unified syntax tree over Python and Java sources.

Both languages parse into the same `SyntaxNode` shape; only the node-kind
vocabulary differs (Python kinds here, Java kinds in java_parser). Spans are
byte offsets into the UTF-8 encoding of the file; line/column is derived for
display only.
"""

from __future__ import annotations

import ast
import bisect
import inspect
from dataclasses import dataclass, field


@dataclass
class SyntaxNode:
    kind: str
    start: int
    end: int
    children: list[SyntaxNode] = field(default_factory=list)
    text: str | None = None
    fields: dict[str, str | None] = field(default_factory=dict)

    def child_by_kind(self, kind: str) -> SyntaxNode | None:
        for child in self.children:
            if child.kind == kind:
                return child
        return None

    def children_by_kind(self, kind: str) -> list[SyntaxNode]:
        return [c for c in self.children if c.kind == kind]


@dataclass
class SyntaxTree:
    root: SyntaxNode
    source: bytes

    def node_count(self) -> int:
        count = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            count += 1
            stack.extend(node.children)
        return count


class SourceParseError(Exception):
    """The file cannot be parsed; the caller records a skip."""


def line_starts(source: bytes) -> list[int]:
    """Byte offset of each line start (0-based line index)."""
    starts = [0]
    for i, byte in enumerate(source):
        if byte == 0x0A:
            starts.append(i + 1)
    return starts


def position_of(source: bytes, offset: int) -> tuple[int, int]:
    """(1-based line, 0-based byte column) for display; spans stay byte-based."""
    starts = line_starts(source)
    line = bisect.bisect_right(starts, offset)
    return line, offset - starts[line - 1]


def parse_python(content: str) -> SyntaxTree:
    source = content.encode("utf-8")
    try:
        module = ast.parse(content)
    except (SyntaxError, ValueError) as exc:
        raise SourceParseError(str(exc)) from exc
    starts = line_starts(source)

    def offset(lineno: int, col: int) -> int:
        # CPython reports col_offset as a UTF-8 byte offset within the line.
        return starts[lineno - 1] + col

    def span(node: ast.AST) -> tuple[int, int]:
        return (
            offset(node.lineno, node.col_offset),
            offset(node.end_lineno, node.end_col_offset),
        )

    def leaf(kind: str, text: str, at: tuple[int, int]) -> SyntaxNode:
        return SyntaxNode(kind=kind, start=at[0], end=at[1], text=text)

    def docstring_node(stmt_body: list[ast.stmt]) -> SyntaxNode | None:
        if (
            stmt_body
            and isinstance(stmt_body[0], ast.Expr)
            and isinstance(stmt_body[0].value, ast.Constant)
            and isinstance(stmt_body[0].value.value, str)
        ):
            doc = inspect.cleandoc(stmt_body[0].value.value)
            return leaf("comment", doc, span(stmt_body[0]))
        return None

    def parameter_nodes(args: ast.arguments) -> list[SyntaxNode]:
        ordered = list(args.posonlyargs) + list(args.args)
        if args.vararg:
            ordered.append(args.vararg)
        ordered.extend(args.kwonlyargs)
        if args.kwarg:
            ordered.append(args.kwarg)
        nodes = []
        for a in ordered:
            declared = ast.unparse(a.annotation) if a.annotation is not None else None
            nodes.append(
                SyntaxNode(
                    kind="parameter",
                    start=offset(a.lineno, a.col_offset),
                    end=offset(a.end_lineno, a.end_col_offset),
                    fields={"name": a.arg, "type": declared},
                )
            )
        return nodes

    def convert_function(stmt: ast.FunctionDef | ast.AsyncFunctionDef) -> SyntaxNode:
        at = span(stmt)
        returns = ast.unparse(stmt.returns) if stmt.returns is not None else None
        node = SyntaxNode(
            kind="function_definition",
            start=at[0],
            end=at[1],
            fields={"name": stmt.name, "return_type": returns},
        )
        node.children.extend(parameter_nodes(stmt.args))
        doc = docstring_node(stmt.body)
        if doc is not None:
            node.children.append(doc)
        for child in stmt.body:
            converted = convert_statement(child)
            if converted is not None:
                node.children.append(converted)
        return node

    def convert_class(stmt: ast.ClassDef) -> SyntaxNode:
        at = span(stmt)
        node = SyntaxNode(
            kind="class_definition", start=at[0], end=at[1], fields={"name": stmt.name}
        )
        for base in stmt.bases:
            node.children.append(leaf("supertype", ast.unparse(base), span(base)))
        doc = docstring_node(stmt.body)
        if doc is not None:
            node.children.append(doc)
        for child in stmt.body:
            converted = convert_statement(child)
            if converted is not None:
                node.children.append(converted)
        return node

    def binding(kind_name: str, at: tuple[int, int], **fields_) -> SyntaxNode:
        return SyntaxNode(kind="import_binding", start=at[0], end=at[1], fields={"bind": kind_name, **fields_})

    def convert_import(stmt: ast.Import) -> SyntaxNode:
        at = span(stmt)
        node = SyntaxNode(kind="import_statement", start=at[0], end=at[1])
        for alias in stmt.names:
            local = alias.asname if alias.asname else alias.name
            node.children.append(
                binding("module_alias", at, local=local, target=alias.name)
            )
        return node

    def convert_import_from(stmt: ast.ImportFrom) -> SyntaxNode:
        at = span(stmt)
        node = SyntaxNode(
            kind="import_from_statement",
            start=at[0],
            end=at[1],
            fields={"level": str(stmt.level)},
        )
        module = stmt.module or ""
        for alias in stmt.names:
            if alias.name == "*":
                node.children.append(binding("wildcard", at, local="", target=module))
                continue
            local = alias.asname if alias.asname else alias.name
            target = f"{module}.{alias.name}" if module else alias.name
            node.children.append(binding("entity_import", at, local=local, target=target))
        return node

    def convert_statement(stmt: ast.stmt) -> SyntaxNode | None:
        if isinstance(stmt, (ast.FunctionDef, ast.AsyncFunctionDef)):
            return convert_function(stmt)
        if isinstance(stmt, ast.ClassDef):
            return convert_class(stmt)
        if isinstance(stmt, ast.Import):
            return convert_import(stmt)
        if isinstance(stmt, ast.ImportFrom):
            return convert_import_from(stmt)
        # Compound statements can nest declarations (e.g. defs under `if`).
        nested = [
            convert_statement(s)
            for s in ast.iter_child_nodes(stmt)
            if isinstance(s, ast.stmt)
        ]
        nested = [n for n in nested if n is not None]
        if nested:
            at = span(stmt)
            return SyntaxNode(kind="block", start=at[0], end=at[1], children=nested)
        return None

    root = SyntaxNode(kind="module", start=0, end=len(source))
    doc = docstring_node(module.body)
    if doc is not None:
        root.children.append(doc)
    for stmt in module.body:
        converted = convert_statement(stmt)
        if converted is not None:
            root.children.append(converted)
    return SyntaxTree(root=root, source=source)


def parse_source(content: str, language) -> SyntaxTree:
    """Parse source text with the adapter for `language` (a model.Language)."""
    from . import java_parser
    from .model import Language

    if language == Language.PYTHON:
        return parse_python(content)
    if language == Language.JAVA:
        return java_parser.parse_java(content)
    raise ValueError(f"unsupported language: {language}")
