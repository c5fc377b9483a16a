import math

import pytest

from helpers import cursor_after
from lancekit.context import (
    TOKEN_MODE,
    CompletionContext,
    match_entity,
    rank_conversational_candidates,
    token_completion_context,
)
from lancekit.errors import EmptyContextError
from lancekit.prompt import (
    build_query_prompt,
    build_token_prompt,
    estimate_tokens,
    render_call,
    render_signature,
)

MAIN = "hotel_management_system.py"
QUERY = "how to process payment with PaymentProcessor?"


@pytest.fixture()
def token_context(py_index, py_vindex, main_py):
    cursor = cursor_after(main_py, "sentiment = tp.")
    return token_completion_context(py_index, py_vindex, MAIN, main_py, cursor, k=10)


@pytest.fixture()
def query_context(py_index, py_vindex):
    keys = match_entity("PaymentProcessor", py_vindex, k=3)
    context = rank_conversational_candidates(keys, "process payment", py_index, py_vindex, k=10)
    context.owner_alias = "pp"
    return context


def prefix_of(main_py):
    return main_py.encode("utf-8")[: cursor_after(main_py, "sentiment = tp.")].decode("utf-8")


def test_top_signature_appears_first(token_context, main_py):
    bundle = build_token_prompt(token_context, prefix_of(main_py))
    body = bundle.user_text
    top = "text_processing.sentiment_analysis(text: str) -> str"
    assert top in body
    others = [render_signature(fn) for fn, _ in token_context.candidates[1:]]
    assert all(body.index(top) < body.index(sig) for sig in others)


def test_signatures_keep_rank_order(token_context, main_py):
    bundle = build_token_prompt(token_context, prefix_of(main_py))
    positions = [
        bundle.user_text.index(render_signature(fn)) for fn, _ in token_context.candidates
    ]
    assert positions == sorted(positions)
    assert bundle.candidate_count == len(token_context.candidates)


def test_prefix_is_verbatim(token_context, main_py):
    prefix = prefix_of(main_py)
    bundle = build_token_prompt(token_context, prefix)
    assert prefix in bundle.user_text


def test_single_candidate_renders_single_signature(token_context, main_py):
    solo = CompletionContext(
        mode=TOKEN_MODE,
        resolved_module=token_context.resolved_module,
        candidates=token_context.candidates[:1],
        local_cues=[],
        truncated=False,
        owner_alias="tp",
    )
    bundle = build_token_prompt(solo, prefix_of(main_py))
    assert bundle.candidate_count == 1
    signature_lines = [
        line for line in bundle.user_text.splitlines() if line.startswith("text_processing.")
    ]
    assert len(signature_lines) == 1


def test_budget_drops_lowest_ranked_signatures_first(token_context, main_py):
    prefix = prefix_of(main_py)
    full = build_token_prompt(token_context, prefix)
    smaller = build_token_prompt(token_context, prefix, budget=full.token_estimate - 5)
    assert smaller.candidate_count < full.candidate_count
    assert smaller.truncated is True
    kept = [render_signature(fn) for fn, _ in token_context.candidates[: smaller.candidate_count]]
    assert all(sig in smaller.user_text for sig in kept)
    dropped = [render_signature(fn) for fn, _ in token_context.candidates[smaller.candidate_count :]]
    assert all(sig not in smaller.user_text for sig in dropped)


def test_budget_smaller_than_prefix_keeps_prefix(token_context, main_py):
    prefix = prefix_of(main_py)
    bundle = build_token_prompt(token_context, prefix, budget=10)
    assert bundle.candidate_count == 0
    assert bundle.truncated is True
    assert prefix in bundle.user_text


def test_budget_respected_or_truncated(token_context, main_py):
    prefix = prefix_of(main_py)
    for budget in (10, 100, 400, 3000):
        bundle = build_token_prompt(token_context, prefix, budget=budget)
        assert bundle.token_estimate <= budget or bundle.truncated


def test_query_prompt_contains_query_and_signature(query_context):
    bundle = build_query_prompt(query_context, QUERY)
    assert QUERY in bundle.user_text
    assert "payment_processor.process_payment(name: str, payment: Payment) -> bool" in bundle.user_text


def test_query_prompt_without_prefix_omits_code_section(query_context):
    bundle = build_query_prompt(query_context, QUERY, file_prefix=None)
    assert "Code before the cursor" not in bundle.user_text


def test_query_prompt_with_prefix_includes_it(query_context):
    bundle = build_query_prompt(query_context, QUERY, file_prefix="result = pp.")
    assert "Code before the cursor" in bundle.user_text
    assert "result = pp." in bundle.user_text


def test_two_candidates_keep_order(query_context):
    bundle = build_query_prompt(query_context, QUERY)
    first = bundle.user_text.index("process_payment(name: str")
    second = bundle.user_text.index("refund_payment(transaction_id: str")
    assert first < second


def test_empty_context_rejected():
    empty = CompletionContext(
        mode=TOKEN_MODE, resolved_module="m", candidates=[], local_cues=[], truncated=False
    )
    with pytest.raises(EmptyContextError):
        build_token_prompt(empty, "prefix")


def test_mode_mismatch_rejected(token_context, query_context, main_py):
    with pytest.raises(ValueError):
        build_query_prompt(token_context, QUERY)
    with pytest.raises(ValueError):
        build_token_prompt(query_context, prefix_of(main_py))


def test_token_estimate_formula():
    text = "one two three four"
    assert estimate_tokens(text) == math.ceil(4 * 1.3)
    assert estimate_tokens("") == 0


def test_render_signature_styles(py_index):
    untyped = next(f for f in py_index.functions if f.qualified_name == "Hotel.book")
    assert render_signature(untyped) == "Hotel.book(self, room_type, number, guest)"
    documented = next(f for f in py_index.functions if f.name == "sentiment_analysis")
    assert render_signature(documented) == (
        "text_processing.sentiment_analysis(text: str) -> str"
        "  # Label the text positive, negative, or neutral."
    )


def test_render_call_uses_alias_and_param_names(py_index):
    fn = next(f for f in py_index.functions if f.name == "process_payment")
    assert render_call(fn, "pp") == "pp.process_payment(name, payment)"
    assert render_call(fn, None) == "payment_processor.process_payment(name, payment)"
    method = next(f for f in py_index.functions if f.qualified_name == "Hotel.book")
    assert render_call(method, "h") == "h.book(room_type, number, guest)"


def test_bundle_calls_follow_rank_order(token_context, main_py):
    bundle = build_token_prompt(token_context, prefix_of(main_py))
    assert bundle.calls[0] == "tp.sentiment_analysis(text)"
    assert len(bundle.calls) == bundle.candidate_count
