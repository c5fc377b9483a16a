import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lancekit.embed import HashEmbedder, embed_hash
from lancekit.errors import DimensionMismatchError, EmptyRepoError
from lancekit.model import (
    ApiFunction,
    EntityKind,
    EntityRecord,
    Language,
    Parameter,
    RepoIndex,
    Visibility,
)
from lancekit.vindex import (
    PAYLOAD_ENTITY,
    PAYLOAD_FUNCTION,
    build_vector_index,
    load_vector_index,
    query_topk,
    save_vector_index,
)
from reference import ref_rank

EMBEDDER = HashEmbedder()


def make_function(name, owner, file="m.py", start=0, visibility=Visibility.UNSPECIFIED):
    return ApiFunction(
        name=name,
        visibility=visibility,
        parameters=(Parameter("x"),),
        comment=None,
        return_type=None,
        owner_entity=owner,
        file=file,
        span=(start, start + 5),
    )


def make_repo_index(functions, entities=()):
    return RepoIndex(
        repo_root="repo",
        language=Language.PYTHON,
        functions=tuple(functions),
        entities=tuple(entities),
        imports_by_file={},
        created_at="2023-06-01T00:00:00+00:00",
    )


def test_fixture_index_has_qualified_keys(py_vindex):
    keys = {e.key for e in py_vindex.entries if e.payload == PAYLOAD_FUNCTION}
    assert "text_processing.sentiment_analysis" in keys
    entity_keys = {e.key for e in py_vindex.entries if e.payload == PAYLOAD_ENTITY}
    assert "payment_processor" in entity_keys


def test_one_entry_per_function_and_entity(py_index, py_vindex):
    assert len(py_vindex) == len(py_index.functions) + len(py_index.entities)


def test_keys_unique_per_payload_kind(py_vindex, java_vindex):
    for vindex in (py_vindex, java_vindex):
        pairs = [(e.payload, e.key) for e in vindex.entries]
        assert len(pairs) == len(set(pairs))


def test_minimal_index_counts():
    fn = make_function("f", "m")
    entity = EntityRecord("m", EntityKind.MODULE, (), None, "m.py", (fn.key,))
    vindex = build_vector_index(make_repo_index([fn], [entity]), EMBEDDER)
    assert len(vindex) == 2


def test_empty_repo_index_rejected():
    with pytest.raises(EmptyRepoError):
        build_vector_index(make_repo_index([]), EMBEDDER)


def test_duplicate_qualified_names_get_ordinal_suffixes():
    overloads = [
        make_function("translate", "C", file="C.java", start=0),
        make_function("translate", "C", file="C.java", start=100),
    ]
    vindex = build_vector_index(make_repo_index(overloads), EMBEDDER)
    keys = [e.key for e in vindex.entries]
    assert keys == ["C.translate#1", "C.translate#2"]
    # Suffix digits are delimiters for the subtokenizer, so both embed alike.
    assert vindex.entries[0].vector == vindex.entries[1].vector


def test_embedder_failures_name_the_offending_key():
    class ExplodingEmbedder:
        id = "exploding"
        dimension = 4

        def embed(self, text):
            raise RuntimeError("service down")

    fn = make_function("f", "mod")
    with pytest.raises(RuntimeError, match="mod.f"):
        build_vector_index(make_repo_index([fn]), ExplodingEmbedder())


def test_self_similarity_is_one(py_vindex):
    for entry in py_vindex.entries[:5]:
        results = query_topk(py_vindex, entry.vector, k=1, kind_filter=entry.payload)
        key, similarity = results[0]
        assert similarity == pytest.approx(1.0, abs=1e-6)


def test_k_larger_than_index_returns_everything(py_vindex):
    results = query_topk(py_vindex, embed_hash("anything"), k=10_000)
    assert len(results) == len(py_vindex)


def test_k_must_be_positive(py_vindex):
    with pytest.raises(ValueError):
        query_topk(py_vindex, embed_hash("x"), k=0)


def test_process_payment_probe_ranks_payment_module_first(py_vindex):
    probe = embed_hash("process payment")
    results = query_topk(py_vindex, probe, k=3)
    assert results[0][0] == "payment_processor.process_payment"
    # Cross-check the whole top-3 against the scalar-loop oracle.
    expected = ref_rank("process payment", [e.key for e in py_vindex.entries])[:3]
    assert [key for key, _ in results] == [key for key, _ in expected]


def test_similarities_are_bounded_and_non_increasing(py_vindex):
    for probe_text in ("sentiment", "refund transaction", "hotel booking"):
        results = query_topk(py_vindex, embed_hash(probe_text), k=len(py_vindex))
        sims = [s for _, s in results]
        assert all(-1.0 <= s <= 1.0 for s in sims)
        assert all(a >= b for a, b in zip(sims, sims[1:]))


def test_kind_filter_restricts_results(py_vindex):
    results = query_topk(py_vindex, embed_hash("payment"), k=50, kind_filter=PAYLOAD_ENTITY)
    entity_keys = {e.key for e in py_vindex.entries if e.payload == PAYLOAD_ENTITY}
    assert results
    assert all(key in entity_keys for key, _ in results)


def test_dimension_mismatch_rejected(py_vindex):
    probe = embed_hash("x", dimension=128)
    with pytest.raises(DimensionMismatchError):
        query_topk(py_vindex, probe, k=1)


def test_sidecar_round_trip(py_vindex, tmp_path):
    path = tmp_path / "index.vec"
    save_vector_index(py_vindex, path)
    loaded = load_vector_index(path, embedder=EMBEDDER)
    assert loaded.embedder_id == py_vindex.embedder_id
    assert [(e.key, e.payload) for e in loaded.entries] == [
        (e.key, e.payload) for e in py_vindex.entries
    ]
    assert loaded.entries[0].vector == py_vindex.entries[0].vector
    assert loaded.function_keys == py_vindex.function_keys
    assert loaded.entity_files == py_vindex.entity_files


names = st.from_regex(r"[a-z][a-z_]{0,11}", fullmatch=True)


@settings(max_examples=60, deadline=None)
@given(
    keys=st.lists(names, min_size=1, max_size=40, unique=True),
    probe_text=names,
    k=st.integers(min_value=1, max_value=50),
)
def test_topk_equals_brute_force(keys, probe_text, k):
    functions = [make_function(key, None, start=i * 10) for i, key in enumerate(keys)]
    vindex = build_vector_index(make_repo_index(functions), EMBEDDER)
    results = query_topk(vindex, embed_hash(probe_text), k=k)
    expected = ref_rank(probe_text, keys)[:k]
    assert [key for key, _ in results] == [key for key, _ in expected]


def test_topk_equals_brute_force_large_seeded_corpus():
    rng = random.Random(7)
    syllables = ["pay", "proc", "sent", "tok", "lem", "stem", "find", "get", "word", "count"]
    keys = list(
        {
            "_".join(rng.choice(syllables) for _ in range(rng.randint(1, 3))) + f"_{i}"
            for i in range(1000)
        }
    )
    functions = [make_function(key, None, start=i * 10) for i, key in enumerate(sorted(keys))]
    vindex = build_vector_index(make_repo_index(functions), EMBEDDER)
    for probe_text in ("payment", "sent_word", "tok"):
        results = query_topk(vindex, embed_hash(probe_text), k=25)
        expected = ref_rank(probe_text, sorted(keys))[:25]
        assert [key for key, _ in results] == [key for key, _ in expected]
