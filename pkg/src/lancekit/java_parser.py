"""Lightweight Java declaration parser emitting the unified syntax tree.

Scans declarations only: packages, imports, type declarations (recursively),
methods, constructors, and fields. Method bodies are skipped wholesale, so
statement-level constructs never need a grammar. Good enough for signature
extraction; not a general Java front end.
"""

from __future__ import annotations

from dataclasses import dataclass

from .syntax import SourceParseError, SyntaxNode, SyntaxTree

_MODIFIERS = {
    "public",
    "private",
    "protected",
    "static",
    "final",
    "abstract",
    "synchronized",
    "native",
    "strictfp",
    "transient",
    "volatile",
    "default",
    "sealed",
    "non-sealed",
}
_TYPE_KEYWORDS = {"class", "interface", "enum", "record"}


@dataclass
class _Token:
    kind: str  # ident | punct | string | char | number | comment
    text: str
    start: int
    end: int
    line: int


def _tokenize(content: str) -> list[_Token]:
    source = content.encode("utf-8")
    tokens: list[_Token] = []
    i = 0
    n = len(source)
    line = 1

    def char_at(pos: int) -> str:
        return chr(source[pos]) if pos < n else ""

    while i < n:
        c = char_at(i)
        if c == "\n":
            line += 1
            i += 1
            continue
        if c in " \t\r\f":
            i += 1
            continue
        if c == "/" and char_at(i + 1) == "/":
            start = i
            while i < n and char_at(i) != "\n":
                i += 1
            tokens.append(_Token("comment", source[start:i].decode("utf-8"), start, i, line))
            continue
        if c == "/" and char_at(i + 1) == "*":
            start = i
            start_line = line
            i += 2
            while i < n and not (char_at(i) == "*" and char_at(i + 1) == "/"):
                if char_at(i) == "\n":
                    line += 1
                i += 1
            if i >= n:
                raise SourceParseError(f"unterminated block comment at byte {start}")
            i += 2
            tokens.append(
                _Token("comment", source[start:i].decode("utf-8"), start, i, start_line)
            )
            continue
        if c in "\"'":
            quote = c
            start = i
            i += 1
            while i < n:
                ch = char_at(i)
                if ch == "\\":
                    i += 2
                    continue
                if ch == quote:
                    i += 1
                    break
                if ch == "\n":
                    raise SourceParseError(f"unterminated literal at byte {start}")
                i += 1
            else:
                raise SourceParseError(f"unterminated literal at byte {start}")
            kind = "string" if quote == '"' else "char"
            tokens.append(_Token(kind, source[start:i].decode("utf-8"), start, i, line))
            continue
        if c.isalpha() or c in "_$":
            start = i
            while i < n and (char_at(i).isalnum() or char_at(i) in "_$"):
                i += 1
            tokens.append(_Token("ident", source[start:i].decode("utf-8"), start, i, line))
            continue
        if c.isdigit():
            start = i
            while i < n and (char_at(i).isalnum() or char_at(i) in "._xXbBlLfFdDeE+-"):
                nxt = char_at(i)
                if nxt in "+-" and char_at(i - 1) not in "eEpP":
                    break
                i += 1
            tokens.append(_Token("number", source[start:i].decode("utf-8"), start, i, line))
            continue
        tokens.append(_Token("punct", c, i, i + 1, line))
        i += 1
    return tokens


def _merge_comment_blocks(comments: list[_Token], source: bytes) -> list[_Token]:
    """Consecutive // lines with no blank gap act as one doc block."""
    merged: list[_Token] = []
    for tok in comments:
        if (
            merged
            and tok.text.startswith("//")
            and merged[-1].text.startswith("//")
            and source[merged[-1].end : tok.start].decode("utf-8").count("\n") <= 1
            and not source[merged[-1].end : tok.start].decode("utf-8").strip()
        ):
            prev = merged[-1]
            merged[-1] = _Token(
                "comment",
                prev.text + "\n" + tok.text,
                prev.start,
                tok.end,
                prev.line,
            )
        else:
            merged.append(tok)
    return merged


def clean_comment(text: str) -> str:
    """Strip comment delimiters and per-line asterisk gutters."""
    if text.startswith("/*"):
        body = text[2:]
        if body.startswith("*"):
            body = body[1:]
        if body.endswith("*/"):
            body = body[:-2]
        lines = []
        for raw in body.splitlines():
            stripped = raw.strip()
            if stripped.startswith("*"):
                stripped = stripped[1:].strip()
            lines.append(stripped)
        return "\n".join(lines).strip()
    lines = []
    for raw in text.splitlines():
        stripped = raw.strip()
        if stripped.startswith("//"):
            stripped = stripped[2:].strip()
        lines.append(stripped)
    return "\n".join(lines).strip()


def _join_type(tokens: list[_Token]) -> str:
    """Render type tokens back to canonical source text (Map<String, Integer>[])."""
    out = ""
    prev: _Token | None = None
    for tok in tokens:
        wordy = tok.kind in ("ident", "number") or tok.text == "?"
        prev_wordy = prev is not None and (
            prev.kind in ("ident", "number") or prev.text in (",", "?")
        )
        if out and wordy and prev_wordy:
            out += " "
        out += tok.text
        prev = tok
    return out


class _Parser:
    def __init__(self, content: str):
        self.source = content.encode("utf-8")
        all_tokens = _tokenize(content)
        self.comments = _merge_comment_blocks(
            [t for t in all_tokens if t.kind == "comment"], self.source
        )
        self.tokens = [t for t in all_tokens if t.kind != "comment"]
        self.pos = 0

    # -- token helpers ----------------------------------------------------
    def peek(self, ahead: int = 0) -> _Token | None:
        idx = self.pos + ahead
        return self.tokens[idx] if idx < len(self.tokens) else None

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "punct" and tok.text == text

    def at_ident(self, text: str | None = None) -> bool:
        tok = self.peek()
        if tok is None or tok.kind != "ident":
            return False
        return text is None or tok.text == text

    def expect_punct(self, text: str) -> _Token:
        if not self.at_punct(text):
            tok = self.peek()
            where = f"byte {tok.start}" if tok else "end of file"
            raise SourceParseError(f"expected {text!r} at {where}")
        return self.advance()

    def skip_balanced(self, open_: str, close: str) -> int:
        """Consume from the current `open_` to its matching `close`; returns end byte."""
        self.expect_punct(open_)
        depth = 1
        while depth > 0:
            tok = self.peek()
            if tok is None:
                raise SourceParseError(f"unbalanced {open_!r}")
            self.advance()
            if tok.kind == "punct" and tok.text == open_:
                depth += 1
            elif tok.kind == "punct" and tok.text == close:
                depth -= 1
        return self.tokens[self.pos - 1].end

    def skip_annotation(self) -> None:
        self.expect_punct("@")
        if self.at_ident():
            self.advance()
            while self.at_punct(".") and self.peek(1) is not None and self.peek(1).kind == "ident":
                self.advance()
                self.advance()
        if self.at_punct("("):
            self.skip_balanced("(", ")")

    def dotted_name(self) -> str:
        parts = [self.advance().text]
        while self.at_punct(".") and self.peek(1) is not None and self.peek(1).kind == "ident":
            self.advance()
            parts.append(self.advance().text)
        return ".".join(parts)

    # -- doc attachment ----------------------------------------------------
    def doc_for(self, decl_start: int) -> SyntaxNode | None:
        best = None
        for comment in self.comments:
            if comment.end <= decl_start:
                best = comment
            else:
                break
        if best is None:
            return None
        gap = self.source[best.end : decl_start].decode("utf-8")
        if gap.strip() or gap.count("\n") > 1:
            return None
        text = clean_comment(best.text)
        if not text:
            return None
        return SyntaxNode(kind="comment", start=best.start, end=best.end, text=text)

    # -- grammar -----------------------------------------------------------
    def parse_program(self) -> SyntaxNode:
        root = SyntaxNode(kind="program", start=0, end=len(self.source))
        while self.peek() is not None:
            if self.at_ident("package"):
                start = self.advance().start
                name = self.dotted_name() if self.at_ident() else ""
                end = self.advance().end if self.at_punct(";") else self.tokens[self.pos - 1].end
                root.children.append(
                    SyntaxNode(
                        kind="package_declaration", start=start, end=end, fields={"name": name}
                    )
                )
                continue
            if self.at_ident("import"):
                root.children.append(self.parse_import())
                continue
            node = self.try_parse_type_declaration()
            if node is not None:
                root.children.append(node)
                continue
            self.advance()
        return root

    def parse_import(self) -> SyntaxNode:
        start = self.advance().start  # 'import'
        if self.at_ident("static"):
            self.advance()
        path = self.dotted_name() if self.at_ident() else ""
        wildcard = False
        if self.at_punct(".") and self.peek(1) is not None and self.peek(1).text == "*":
            self.advance()
            self.advance()
            wildcard = True
        end = self.advance().end if self.at_punct(";") else self.tokens[self.pos - 1].end
        node = SyntaxNode(kind="import_declaration", start=start, end=end)
        if wildcard:
            binding = {"bind": "wildcard", "local": "", "target": path}
        else:
            binding = {
                "bind": "entity_import",
                "local": path.rsplit(".", 1)[-1],
                "target": path,
            }
        node.children.append(
            SyntaxNode(kind="import_binding", start=start, end=end, fields=binding)
        )
        return node

    def _scan_modifiers(self) -> tuple[list[str], int | None]:
        """Consume annotations and modifiers; returns (modifiers, start byte)."""
        modifiers: list[str] = []
        start: int | None = None
        while True:
            tok = self.peek()
            if tok is None:
                return modifiers, start
            if tok.kind == "punct" and tok.text == "@":
                start = tok.start if start is None else start
                self.skip_annotation()
                continue
            if tok.kind == "ident" and tok.text in _MODIFIERS:
                start = tok.start if start is None else start
                modifiers.append(self.advance().text)
                continue
            return modifiers, start

    def try_parse_type_declaration(self) -> SyntaxNode | None:
        saved = self.pos
        modifiers, start = self._scan_modifiers()
        tok = self.peek()
        if tok is None or tok.kind != "ident" or tok.text not in _TYPE_KEYWORDS:
            self.pos = saved
            return None
        nxt = self.peek(1)
        if nxt is None or nxt.kind != "ident":
            # `record`/`class` used as an identifier, not a declaration.
            self.pos = saved
            return None
        keyword = self.advance().text
        decl_start = start if start is not None else tok.start
        name = self.advance().text
        if self.at_punct("<"):
            self.skip_balanced("<", ">")

        supertypes: list[str] = []
        while self.at_ident() and self.peek().text in ("extends", "implements", "permits"):
            clause = self.advance().text
            while True:
                if not self.at_ident():
                    break
                super_name = self.dotted_name()
                if self.at_punct("<"):
                    self.skip_balanced("<", ">")
                if clause != "permits":
                    supertypes.append(super_name)
                if self.at_punct(","):
                    self.advance()
                    continue
                break

        node = SyntaxNode(
            kind=f"{keyword}_declaration" if keyword != "record" else "class_declaration",
            start=decl_start,
            end=decl_start,  # patched after the body
            fields={"name": name, "visibility": _visibility(modifiers)},
        )
        doc = self.doc_for(decl_start)
        if doc is not None:
            node.children.append(doc)
        for super_name in supertypes:
            node.children.append(
                SyntaxNode(kind="supertype", start=decl_start, end=decl_start, text=super_name)
            )
        if keyword == "record" and self.at_punct("("):
            self.skip_balanced("(", ")")
        body_end = self.parse_type_body(node, name, enum_body=(keyword == "enum"))
        node.end = body_end
        return node

    def parse_type_body(self, owner: SyntaxNode, owner_name: str, enum_body: bool) -> int:
        self.expect_punct("{")
        if enum_body:
            self._skip_enum_constants()
        while True:
            tok = self.peek()
            if tok is None:
                raise SourceParseError(f"unterminated body of {owner_name}")
            if tok.kind == "punct" and tok.text == "}":
                return self.advance().end
            if tok.kind == "punct" and tok.text == ";":
                self.advance()
                continue
            member = self.parse_member(owner_name)
            if member is not None:
                owner.children.append(member)

    def _skip_enum_constants(self) -> None:
        while True:
            tok = self.peek()
            if tok is None:
                return
            if tok.kind == "punct":
                if tok.text == ";":
                    self.advance()
                    return
                if tok.text == "}":
                    return
                if tok.text == "(":
                    self.skip_balanced("(", ")")
                    continue
                if tok.text == "{":
                    self.skip_balanced("{", "}")
                    continue
            self.advance()

    def parse_member(self, owner_name: str) -> SyntaxNode | None:
        nested = self.try_parse_type_declaration()
        if nested is not None:
            return nested

        modifiers, start = self._scan_modifiers()
        tok = self.peek()
        if tok is None:
            return None
        decl_start = start if start is not None else tok.start

        if tok.kind == "punct" and tok.text == "{":
            # static or instance initializer block
            self.skip_balanced("{", "}")
            return None

        # Collect header tokens up to the declarator boundary.
        header: list[_Token] = []
        while True:
            tok = self.peek()
            if tok is None:
                return None
            if tok.kind == "punct" and tok.text == "<":
                if not header:
                    # Method type parameters (e.g. `<T> T first(...)`) are dropped.
                    self.skip_balanced("<", ">")
                    continue
                # Part of a generic return type: keep the whole <...> run.
                depth = 0
                while True:
                    if self.peek() is None:
                        raise SourceParseError(f"unbalanced '<' at byte {tok.start}")
                    inner = self.advance()
                    header.append(inner)
                    if inner.kind == "punct" and inner.text == "<":
                        depth += 1
                    elif inner.kind == "punct" and inner.text == ">":
                        depth -= 1
                        if depth == 0:
                            break
                continue
            if tok.kind == "punct" and tok.text in "(=;{":
                break
            header.append(self.advance())

        boundary = self.peek()
        if boundary is None:
            return None
        if boundary.text == "(" and header:
            return self._finish_method(header, modifiers, decl_start, owner_name)
        if boundary.text == "{":
            self.skip_balanced("{", "}")
            return None
        # Field declaration or stray construct: consume to the ending ';'.
        self._skip_to_semicolon()
        return None

    def _skip_to_semicolon(self) -> None:
        while True:
            tok = self.peek()
            if tok is None:
                return
            if tok.kind == "punct" and tok.text == "{":
                self.skip_balanced("{", "}")
                continue
            if tok.kind == "punct" and tok.text == "(":
                self.skip_balanced("(", ")")
                continue
            self.advance()
            if tok.kind == "punct" and tok.text == ";":
                return

    def _finish_method(
        self, header: list[_Token], modifiers: list[str], decl_start: int, owner_name: str
    ) -> SyntaxNode | None:
        name_token = header[-1]
        if name_token.kind != "ident":
            self._skip_to_semicolon()
            return None
        type_tokens = header[:-1]
        is_constructor = not type_tokens and name_token.text == owner_name
        return_type = None if is_constructor else (_join_type(type_tokens) or None)

        params = self._parse_parameters()
        # throws clause, then body or ';'
        end = name_token.end
        while True:
            tok = self.peek()
            if tok is None:
                break
            if tok.kind == "punct" and tok.text == "{":
                end = self.skip_balanced("{", "}")
                break
            if tok.kind == "punct" and tok.text == ";":
                end = self.advance().end
                break
            self.advance()
            end = tok.end

        kind = "constructor_declaration" if is_constructor else "method_declaration"
        node = SyntaxNode(
            kind=kind,
            start=decl_start,
            end=end,
            fields={
                "name": name_token.text,
                "visibility": _visibility(modifiers),
                "return_type": return_type,
            },
        )
        doc = self.doc_for(decl_start)
        if doc is not None:
            node.children.append(doc)
        node.children.extend(params)
        return node

    def _parse_parameters(self) -> list[SyntaxNode]:
        open_tok = self.expect_punct("(")
        depth = 1
        angle = 0
        groups: list[list[_Token]] = [[]]
        while depth > 0:
            tok = self.peek()
            if tok is None:
                raise SourceParseError(f"unbalanced parameter list at byte {open_tok.start}")
            self.advance()
            if tok.kind == "punct" and tok.text in "([{":
                depth += 1
            elif tok.kind == "punct" and tok.text in ")]}":
                depth -= 1
                if depth == 0:
                    break
            elif tok.kind == "punct" and tok.text == "<":
                angle += 1
            elif tok.kind == "punct" and tok.text == ">":
                angle -= 1
            elif tok.kind == "punct" and tok.text == "," and depth == 1 and angle == 0:
                groups.append([])
                continue
            groups[-1].append(tok)

        params: list[SyntaxNode] = []
        for group in groups:
            group = self._strip_param_annotations(group)
            if not group:
                continue
            idents = [t for t in group if t.kind == "ident"]
            if not idents:
                continue
            name_tok = idents[-1]
            name_idx = len(group) - 1 - group[::-1].index(name_tok)
            type_tokens = group[:name_idx]
            varargs = (
                len(type_tokens) >= 3
                and all(t.kind == "punct" and t.text == "." for t in type_tokens[-3:])
            )
            if varargs:
                type_tokens = type_tokens[:-3]
            declared = _join_type(type_tokens) or None
            if declared and varargs:
                declared += "..."
            params.append(
                SyntaxNode(
                    kind="formal_parameter",
                    start=group[0].start,
                    end=group[-1].end,
                    fields={"name": name_tok.text, "type": declared},
                )
            )
        return params

    @staticmethod
    def _strip_param_annotations(group: list[_Token]) -> list[_Token]:
        out: list[_Token] = []
        skip_next_ident = False
        for tok in group:
            if tok.kind == "punct" and tok.text == "@":
                skip_next_ident = True
                continue
            if skip_next_ident and tok.kind == "ident":
                skip_next_ident = False
                continue
            if tok.kind == "ident" and tok.text == "final":
                continue
            out.append(tok)
        return out


def _visibility(modifiers: list[str]) -> str:
    for vis in ("public", "private", "protected"):
        if vis in modifiers:
            return vis
    return "package"


def parse_java(content: str) -> SyntaxTree:
    parser = _Parser(content)
    root = parser.parse_program()
    return SyntaxTree(root=root, source=parser.source)
