"""Vector index over API function and entity name embeddings.

Exhaustive cosine scan (vectors are unit length, so cosine == dot product);
no approximate structures. Rankings are deterministic: similarities are
quantized to SIMILARITY_DECIMALS so summation-order float noise collapses
into exact ties, and ties break on the key.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .embed import Embedder, EmbeddingVector
from .errors import DimensionMismatchError, EmptyRepoError, IoError, SchemaError
from .model import FunctionKey, RepoIndex

PAYLOAD_FUNCTION = "function"
PAYLOAD_ENTITY = "entity"

# Distinct name-hash cosines are rationals separated by far more than 1e-12;
# float noise sits around 1e-16. Rounding turns noise into honest ties.
SIMILARITY_DECIMALS = 12


def quantize_similarity(value: float) -> float:
    return round(value, SIMILARITY_DECIMALS)


@dataclass(frozen=True)
class VectorEntry:
    key: str
    payload: str  # PAYLOAD_FUNCTION or PAYLOAD_ENTITY
    vector: EmbeddingVector


@dataclass
class VectorIndex:
    entries: list[VectorEntry]
    embedder_id: str
    embedder: Embedder | None = None
    function_keys: dict[FunctionKey, str] = field(default_factory=dict)
    entity_files: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        dimensions = {e.vector.dimension for e in self.entries}
        if len(dimensions) > 1:
            raise DimensionMismatchError(f"mixed vector dimensions: {sorted(dimensions)}")
        self._matrix = (
            np.array([e.vector.values for e in self.entries], dtype=np.float64)
            if self.entries
            else np.zeros((0, 0))
        )
        self._by_key = {(e.payload, e.key): e for e in self.entries}

    @property
    def dimension(self) -> int:
        return self._matrix.shape[1] if self.entries else 0

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, payload: str, key: str) -> VectorEntry | None:
        return self._by_key.get((payload, key))

    def vector_for_function(self, key: FunctionKey) -> EmbeddingVector | None:
        vkey = self.function_keys.get(key)
        if vkey is None:
            return None
        entry = self.entry(PAYLOAD_FUNCTION, vkey)
        return entry.vector if entry else None


def _suffix_duplicates(keys: list[str]) -> list[str]:
    """Duplicate keys become key#1..key#n in declaration order; unique keys stay bare."""
    counts: dict[str, int] = {}
    for key in keys:
        counts[key] = counts.get(key, 0) + 1
    seen: dict[str, int] = {}
    out = []
    for key in keys:
        if counts[key] == 1:
            out.append(key)
        else:
            seen[key] = seen.get(key, 0) + 1
            out.append(f"{key}#{seen[key]}")
    return out


def build_vector_index(index: RepoIndex, embedder: Embedder) -> VectorIndex:
    """One entry per ApiFunction (keyed owner.name) and one per entity."""
    if not index.functions and not index.entities:
        raise EmptyRepoError("repo index has no functions or entities to embed")

    functions = list(index.functions)
    fn_keys = _suffix_duplicates([f.qualified_name for f in functions])
    entities = list(index.entities)
    entity_keys = _suffix_duplicates([e.name for e in entities])

    entries: list[VectorEntry] = []
    function_key_map: dict[FunctionKey, str] = {}
    entity_files: dict[str, str] = {}
    for fn, key in zip(functions, fn_keys):
        try:
            vector = embedder.embed(key)
        except Exception as exc:
            raise type(exc)(f"embedding function key {key!r}: {exc}") from exc
        entries.append(VectorEntry(key=key, payload=PAYLOAD_FUNCTION, vector=vector))
        function_key_map[fn.key] = key
    for entity, key in zip(entities, entity_keys):
        try:
            vector = embedder.embed(key)
        except Exception as exc:
            raise type(exc)(f"embedding entity key {key!r}: {exc}") from exc
        entries.append(VectorEntry(key=key, payload=PAYLOAD_ENTITY, vector=vector))
        entity_files[key] = entity.file

    return VectorIndex(
        entries=entries,
        embedder_id=embedder.id,
        embedder=embedder,
        function_keys=function_key_map,
        entity_files=entity_files,
    )


def query_topk(
    vindex: VectorIndex,
    probe: EmbeddingVector,
    k: int,
    kind_filter: str | None = None,
) -> list[tuple[str, float]]:
    """Top-k entries by cosine similarity, descending; ties break on key ascending."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if not vindex.entries:
        return []
    if probe.dimension != vindex.dimension:
        raise DimensionMismatchError(
            f"probe dimension {probe.dimension} != index dimension {vindex.dimension}"
        )
    similarities = vindex._matrix @ np.array(probe.values, dtype=np.float64)
    similarities = np.round(np.clip(similarities, -1.0, 1.0), SIMILARITY_DECIMALS)
    candidates = [
        i
        for i, entry in enumerate(vindex.entries)
        if kind_filter is None or entry.payload == kind_filter
    ]
    candidates.sort(key=lambda i: (-similarities[i], vindex.entries[i].key))
    return [
        (vindex.entries[i].key, float(similarities[i])) for i in candidates[:k]
    ]


def save_vector_index(vindex: VectorIndex, destination: str | Path) -> None:
    destination = Path(destination)
    header = {
        "kind": "header",
        "embedder_id": vindex.embedder_id,
        "dimension": vindex.dimension,
    }
    lines = [json.dumps(header)]
    for entry in vindex.entries:
        lines.append(
            json.dumps(
                {
                    "kind": entry.payload,
                    "key": entry.key,
                    "values": list(entry.vector.values),
                }
            )
        )
    for fn_key, vkey in vindex.function_keys.items():
        lines.append(json.dumps({"kind": "fn_key", "fn": list(fn_key), "key": vkey}))
    for ekey, file in vindex.entity_files.items():
        lines.append(json.dumps({"kind": "entity_file", "key": ekey, "file": file}))
    try:
        destination.parent.mkdir(parents=True, exist_ok=True)
        destination.write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write vector index to {destination}: {exc}") from exc


def load_vector_index(source: str | Path, embedder: Embedder | None = None) -> VectorIndex:
    source = Path(source)
    try:
        lines = source.read_text(encoding="utf-8").split("\n")
    except OSError as exc:
        raise IoError(f"cannot read vector index from {source}: {exc}") from exc
    while lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SchemaError("empty vector index file", line=1)
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise SchemaError(f"malformed header: {exc.msg}", line=1) from exc
    entries: list[VectorEntry] = []
    function_keys: dict[FunctionKey, str] = {}
    entity_files: dict[str, str] = {}
    for line_no, raw in enumerate(lines[1:], start=2):
        try:
            record = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed record: {exc.msg}", line=line_no) from exc
        kind = record.get("kind")
        if kind in (PAYLOAD_FUNCTION, PAYLOAD_ENTITY):
            entries.append(
                VectorEntry(
                    key=record["key"],
                    payload=kind,
                    vector=EmbeddingVector(tuple(float(v) for v in record["values"])),
                )
            )
        elif kind == "fn_key":
            fn = record["fn"]
            function_keys[(fn[0], fn[1], fn[2])] = record["key"]
        elif kind == "entity_file":
            entity_files[record["key"]] = record["file"]
        else:
            raise SchemaError(f"unknown record kind {kind!r}", line=line_no)
    return VectorIndex(
        entries=entries,
        embedder_id=header.get("embedder_id", "unknown"),
        embedder=embedder,
        function_keys=function_keys,
        entity_files=entity_files,
    )
