import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import read_normalized
from lancekit.errors import NoCallFoundError, TaskSchemaError
from lancekit.evaluate import (
    EvalTask,
    TaskResult,
    load_tasks,
    parse_predicted_call,
    run_eval,
    score_arguments,
    score_call,
    summarize_results,
    write_report,
    write_report_csv,
)
from lancekit.llm import LlmGateway, MockLlmClient
from lancekit.model import Language
from reference import ref_rank

CUE_BEARING = ["t01_token_sentiment", "t02_token_frequency", "t03_query_payment", "t04_query_refund"]


def make_task(**kwargs):
    defaults = dict(
        id="t",
        mode="conversational",
        repo_ref="repo",
        language=Language.PYTHON,
        context_file=None,
        cursor=None,
        query="q",
        expected_call="m.f",
        expected_args=(),
        accepted_arg_variants=(),
    )
    defaults.update(kwargs)
    return EvalTask(**defaults)


# -- load_tasks -------------------------------------------------------------


def test_fixture_file_loads_six_tasks(py_tasks_path):
    tasks = load_tasks(py_tasks_path)
    assert len(tasks) == 6
    assert sum(t.mode == "token" for t in tasks) == 4
    assert sum(t.mode == "conversational" for t in tasks) == 2
    # repo_ref resolves relative to the tasks file.
    assert all(t.repo_ref.endswith("fixtures/pyrepo") for t in tasks)


def test_fixture_task_cursors_sit_after_a_dot(py_tasks_path, java_tasks_path):
    # Guards the pinned byte offsets against fixture drift.
    for path in (py_tasks_path, java_tasks_path):
        for task in load_tasks(path):
            if task.mode != "token":
                continue
            content = (Path(task.repo_ref) / task.context_file).read_bytes()
            assert content[task.cursor - 1 : task.cursor] == b"."


def test_conversational_cursor_cuts_prefix_before_the_answer(py_tasks_path):
    tasks = {t.id: t for t in load_tasks(py_tasks_path)}
    task = tasks["t03_query_payment"]
    prefix = (Path(task.repo_ref) / task.context_file).read_bytes()[: task.cursor].decode()
    assert "process payment with PaymentProcessor" in prefix  # query comment stays
    assert "pp.process_payment(" not in prefix  # ground-truth line is cut


def test_token_task_missing_cursor_names_line(tmp_path):
    path = tmp_path / "tasks.jsonl"
    good = {
        "id": "a", "mode": "conversational", "repo_ref": "r", "language": "python",
        "query": "q", "expected_call": "m.f", "expected_args": [],
    }
    bad = {
        "id": "b", "mode": "token", "repo_ref": "r", "language": "python",
        "context_file": "f.py", "expected_call": "m.f", "expected_args": [],
    }
    path.write_text(json.dumps(good) + "\n" + json.dumps(bad) + "\n")
    with pytest.raises(TaskSchemaError, match="line 2.*cursor"):
        load_tasks(path)


def test_empty_task_file_rejected(tmp_path):
    path = tmp_path / "tasks.jsonl"
    path.write_text("")
    with pytest.raises(TaskSchemaError, match="zero tasks"):
        load_tasks(path)


def test_malformed_json_names_line(tmp_path):
    path = tmp_path / "tasks.jsonl"
    path.write_text('{"id": "a"\n')
    with pytest.raises(TaskSchemaError, match="line 1"):
        load_tasks(path)


def test_duplicate_ids_rejected(tmp_path, py_tasks_path):
    lines = py_tasks_path.read_text().strip().split("\n")
    path = tmp_path / "tasks.jsonl"
    path.write_text("\n".join([lines[0], lines[0]]) + "\n")
    with pytest.raises(TaskSchemaError, match="duplicate"):
        load_tasks(path)


# -- parse_predicted_call ------------------------------------------------------


@pytest.mark.parametrize(
    "text, callee, args",
    [
        ("tp.sentiment_analysis(review_text)", "tp.sentiment_analysis", ["review_text"]),
        ("pp.process_payment(payment)", "pp.process_payment", ["payment"]),
        ("f(g(a, b), c)", "f", ["g(a, b)", "c"]),
        ("sentiment = tp.sentiment_analysis(review_text)", "tp.sentiment_analysis", ["review_text"]),
        ("no_args()", "no_args", []),
        ('say("hello, world")', "say", ['"hello, world"']),
        ("nested(a[0], {\"k\": v})", "nested", ['a[0]', '{"k": v}']),
    ],
)
def test_parse_predicted_call(text, callee, args):
    assert parse_predicted_call(text, Language.PYTHON) == (callee, args)


def test_fenced_code_is_unwrapped():
    text = "Here you go:\n```python\npp.process_payment(name, payment)\n```\n"
    assert parse_predicted_call(text, Language.PYTHON) == (
        "pp.process_payment",
        ["name", "payment"],
    )


def test_keyword_guards():
    assert parse_predicted_call("if (x) call.me(y)", Language.JAVA) == ("call.me", ["y"])


def test_no_call_raises():
    with pytest.raises(NoCallFoundError):
        parse_predicted_call("just words, no calls", Language.PYTHON)


@settings(max_examples=150, deadline=None)
@given(st.text(max_size=120))
def test_call_parsing_never_crashes(text):
    try:
        callee, args = parse_predicted_call(text, Language.PYTHON)
    except NoCallFoundError:
        return
    assert callee
    assert isinstance(args, list)


# -- score_call ------------------------------------------------------------------


def test_wrong_name_scores_false(py_index):
    task = make_task(
        context_file="hotel_management_system.py",
        expected_call="text_processing.sentiment_analysis",
    )
    assert score_call("tp.analyze", task, py_index) is False


def test_alias_resolution_scores_true(py_index):
    task = make_task(
        context_file="hotel_management_system.py",
        expected_call="text_processing.sentiment_analysis",
    )
    assert score_call("tp.sentiment_analysis", task, py_index) is True


def test_arguments_are_disregarded_for_call_match(py_index):
    task = make_task(
        context_file="hotel_management_system.py",
        expected_call="payment_processor.process_payment",
        expected_args=("name", "payment"),
    )
    # Parsed from `pp.process_payment(payment)`: same callee, wrong args.
    assert score_call("pp.process_payment", task, py_index) is True


def test_qualitative_failure_pairs_score_false(py_index):
    pairs = [
        ("is_course_available", "is_course_active"),
        ("get_all_items", "display_items"),
    ]
    for predicted, expected in pairs:
        task = make_task(expected_call=expected)
        assert score_call(predicted, task, py_index) is False


# -- score_arguments ----------------------------------------------------------------


def test_missing_argument_scores_false():
    task = make_task(expected_args=("name", "payment"))
    assert score_arguments(["payment"], task) is False


def test_exact_arguments_score_true():
    task = make_task(expected_args=("name", "payment"))
    assert score_arguments(["name", "payment"], task) is True


def test_task_authored_variant_scores_true():
    task = make_task(
        expected_args=("user_details.email",),
        accepted_arg_variants=(("user_details['email']",),),
    )
    assert score_arguments(["user_details['email']"], task) is True
    assert score_arguments(["user_details.email"], task) is True
    assert score_arguments(["other"], task) is False


def test_argument_normalization():
    task = make_task(expected_args=("a + b", "c"))
    assert score_arguments(["a  +  b", "(c)"], task) is True


# -- run_eval -----------------------------------------------------------------------


@pytest.fixture()
def gateway(tmp_path):
    return LlmGateway(MockLlmClient(), cache_dir=tmp_path / "cache", rate_per_s=1000)


def test_fixture_eval_outcomes(py_tasks_path, py_index, py_vindex, gateway):
    tasks = load_tasks(py_tasks_path)
    report = run_eval(tasks, py_index, py_vindex, gateway)
    by_id = {r.id: r for r in report.tasks}
    for task_id in CUE_BEARING:
        assert by_id[task_id].call_match, task_id
    assert not by_id["t05_token_misleading_cue"].call_match
    assert not by_id["t06_token_no_cue"].call_match
    assert report.call_accuracy_pct == 66.7
    assert report.argument_matching_pct == 33.3
    assert report.argument_matching_pct <= report.call_accuracy_pct


def test_cue_bearing_subset_scores_perfect_call_accuracy(
    py_tasks_path, py_index, py_vindex, gateway
):
    tasks = [t for t in load_tasks(py_tasks_path) if t.id in CUE_BEARING]
    report = run_eval(tasks, py_index, py_vindex, gateway)
    assert report.call_accuracy_pct == 100.0


def test_adversarial_truth_is_rank_two_under_the_oracle(py_index):
    # The misleading cue points at sentiment_analysis; the ground truth
    # find_entities must sit at rank 2 for the fixture to stay honest.
    keys = [f"text_processing.{f.name}" for f in py_index.functions_of("text_processing")]
    ranking = [key for key, _ in ref_rank("sentiment_score", keys)]
    assert ranking[0] == "text_processing.sentiment_analysis"
    assert ranking[1] == "text_processing.find_entities"


def test_java_fixture_eval(java_tasks_path, java_index, java_vindex, gateway):
    tasks = load_tasks(java_tasks_path)
    report = run_eval(tasks, java_index, java_vindex, gateway)
    by_id = {r.id: r for r in report.tasks}
    assert by_id["j01_token_sentiment"].call_match
    assert not by_id["j01_token_sentiment"].arg_match
    assert by_id["j02_token_typed_local"].call_match
    assert by_id["j02_token_typed_local"].arg_match
    assert by_id["j03_query_refund"].call_match
    assert by_id["j03_query_refund"].arg_match
    assert report.call_accuracy_pct == 100.0
    assert report.argument_matching_pct == 66.7


def test_unresolvable_expected_call_aborts(py_tasks_path, py_index, py_vindex, gateway):
    tasks = load_tasks(py_tasks_path)
    bogus = make_task(
        id="zz_bogus",
        context_file="hotel_management_system.py",
        expected_call="text_processing.never_heard_of_it",
    )
    with pytest.raises(TaskSchemaError, match="zz_bogus"):
        run_eval(tasks + [bogus], py_index, py_vindex, gateway)


def test_report_rows_sorted_by_task_id(py_tasks_path, py_index, py_vindex, gateway):
    tasks = list(reversed(load_tasks(py_tasks_path)))
    report = run_eval(tasks, py_index, py_vindex, gateway)
    ids = [r.id for r in report.tasks]
    assert ids == sorted(ids)


def test_warm_cache_rerun_is_byte_identical_modulo_timestamps(
    py_tasks_path, py_index, py_vindex, tmp_path
):
    tasks = load_tasks(py_tasks_path)
    gateway = LlmGateway(MockLlmClient(), cache_dir=tmp_path / "cache", rate_per_s=1000)
    first = run_eval(tasks, py_index, py_vindex, gateway)
    second = run_eval(tasks, py_index, py_vindex, gateway)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    write_report(first, a)
    write_report(second, b)
    assert read_normalized(a) == read_normalized(b)


class CountingMock(MockLlmClient):
    def __init__(self):
        object.__setattr__(self, "backend_calls", 0)

    def complete(self, bundle):
        object.__setattr__(self, "backend_calls", self.backend_calls + 1)
        return super().complete(bundle)


def test_warm_cache_run_issues_zero_backend_calls(py_tasks_path, py_index, py_vindex, tmp_path):
    client = CountingMock()
    gateway = LlmGateway(client, cache_dir=tmp_path / "cache", rate_per_s=1000)
    tasks = load_tasks(py_tasks_path)
    run_eval(tasks, py_index, py_vindex, gateway)
    cold_calls = client.backend_calls
    assert cold_calls == len(tasks)
    run_eval(tasks, py_index, py_vindex, gateway)
    assert client.backend_calls == cold_calls  # every response served from cache


def test_report_document_structure(py_tasks_path, py_index, py_vindex, gateway, tmp_path):
    report = run_eval(load_tasks(py_tasks_path), py_index, py_vindex, gateway)
    path = tmp_path / "report.json"
    write_report(report, path)
    document = json.loads(path.read_text())
    assert set(document) == {"created_at", "config", "aggregates", "tasks"}
    assert set(document["aggregates"]) == {
        "call_accuracy_pct",
        "argument_matching_pct",
        "mean_latency_ms",
    }
    assert len(document["tasks"]) == 6


def test_csv_export(py_tasks_path, py_index, py_vindex, gateway, tmp_path):
    report = run_eval(load_tasks(py_tasks_path), py_index, py_vindex, gateway)
    path = tmp_path / "report.csv"
    write_report_csv(report, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "id,predicted_text,call_match,arg_match,latency_ms"
    assert len(lines) == 7


# -- aggregate invariants ---------------------------------------------------------------


def make_result(call, arg, latency=0, cached=False):
    return TaskResult(
        id="x",
        predicted_text="",
        call_match=call,
        arg_match=arg,
        latency_ms=latency,
        from_cache=cached,
    )


@settings(max_examples=200, deadline=None)
@given(
    st.lists(
        st.tuples(st.booleans(), st.booleans(), st.integers(0, 5000)),
        min_size=1,
        max_size=40,
    )
)
def test_argument_matching_never_exceeds_call_accuracy(outcomes):
    results = [make_result(call, call and arg, latency) for call, arg, latency in outcomes]
    call_pct, arg_pct, _ = summarize_results(results)
    assert arg_pct <= call_pct


def test_latency_excludes_cache_hits_by_default():
    results = [make_result(True, True, latency=100), make_result(True, True, latency=50, cached=True)]
    _, _, mean_default = summarize_results(results)
    assert mean_default == 100.0
    _, _, mean_inclusive = summarize_results(results, include_cached_latency=True)
    assert mean_inclusive == 75.0


def test_percentages_rounded_to_one_decimal():
    results = [make_result(True, False)] + [make_result(False, False)] * 2
    call_pct, arg_pct, _ = summarize_results(results)
    assert call_pct == 33.3
    assert arg_pct == 0.0
