"""Context-augmented prompt construction.

Templates ship with the package so experiments can pin them; candidates are
rendered one signature per line in rank order, and budget pressure drops the
lowest-ranked signatures first (never the developer's code or query).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources

from .context import CONVERSATIONAL_MODE, TOKEN_MODE, CompletionContext
from .errors import EmptyContextError
from .model import ApiFunction

DEFAULT_TOKEN_BUDGET = 3000


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_text: str
    candidate_count: int
    token_estimate: int
    truncated: bool = False
    calls: tuple[str, ...] = ()


def _template(name: str) -> str:
    return (resources.files("lancekit") / "templates" / name).read_text(encoding="utf-8")


def estimate_tokens(text: str) -> int:
    """Model-free heuristic: whitespace-split word count x 1.3, rounded up."""
    return math.ceil(len(text.split()) * 1.3)


def render_signature(fn: ApiFunction) -> str:
    """`owner.name(param: type, ...) -> type` with the doc comment trailing."""
    params = ", ".join(
        f"{p.name}: {p.declared_type}" if p.declared_type else p.name
        for p in fn.parameters
    )
    line = f"{fn.qualified_name}({params})"
    if fn.return_type:
        line += f" -> {fn.return_type}"
    if fn.comment:
        first_line = fn.comment.strip().splitlines()[0]
        line += f"  # {first_line}"
    return line


def render_call(fn: ApiFunction, alias: str | None) -> str:
    """Call expression using the function's own parameter names as arguments."""
    names = [p.name for p in fn.parameters]
    if names and names[0] in ("self", "cls"):
        names = names[1:]
    owner = alias or fn.owner_entity
    callee = f"{owner}.{fn.name}" if owner else fn.name
    return f"{callee}({', '.join(names)})"


def _assemble(
    template: str,
    context: CompletionContext,
    budget: int,
    *,
    prefix_replacement: str,
    query: str | None,
) -> PromptBundle:
    if not context.candidates:
        raise EmptyContextError("cannot build a prompt from zero candidates")

    functions = [fn for fn, _ in context.candidates]
    system_text = _template("system.txt")

    def user_text_for(count: int) -> str:
        lines = "\n".join(render_signature(fn) for fn in functions[:count])
        text = template.replace("{{candidates}}", lines)
        if query is not None:
            text = text.replace("{{query}}", query)
        return text.replace("{{prefix}}", prefix_replacement)

    count = len(functions)
    user_text = user_text_for(count)
    while estimate_tokens(user_text) > budget and count > 0:
        count -= 1
        user_text = user_text_for(count)

    estimate = estimate_tokens(user_text)
    return PromptBundle(
        system_text=system_text,
        user_text=user_text,
        candidate_count=count,
        token_estimate=estimate,
        truncated=count < len(functions) or estimate > budget,
        calls=tuple(
            render_call(fn, context.owner_alias) for fn in functions[:count]
        ),
    )


def build_token_prompt(
    context: CompletionContext, file_prefix: str, budget: int = DEFAULT_TOKEN_BUDGET
) -> PromptBundle:
    if context.mode != TOKEN_MODE:
        raise ValueError(f"expected a token-mode context, got {context.mode!r}")
    return _assemble(
        _template("token_user.txt"),
        context,
        budget,
        prefix_replacement=file_prefix,
        query=None,
    )


def build_query_prompt(
    context: CompletionContext,
    query: str,
    file_prefix: str | None = None,
    budget: int = DEFAULT_TOKEN_BUDGET,
) -> PromptBundle:
    if context.mode != CONVERSATIONAL_MODE:
        raise ValueError(f"expected a conversational context, got {context.mode!r}")
    section = f"\nCode before the cursor:\n{file_prefix}" if file_prefix is not None else ""
    return _assemble(
        _template("query_user.txt"),
        context,
        budget,
        prefix_replacement=section,
        query=query,
    )
