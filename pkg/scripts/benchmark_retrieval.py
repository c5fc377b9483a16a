#!/usr/bin/env python3
"""Retrieval-latency experiment: top-k scan time over a synthetic index.

Builds a vector index of N hash-embedded function names and measures
query_topk latency over a batch of probes. The shipped default reproduces
the 10,000-entry / 100-query setup used by the acceptance suite.
"""

from __future__ import annotations

import argparse
import random
import statistics
import time

from lancekit.embed import HashEmbedder, embed_hash
from lancekit.model import (
    ApiFunction,
    Language,
    Parameter,
    RepoIndex,
    Visibility,
)
from lancekit.vindex import build_vector_index, query_topk

SYLLABLES = [
    "pay", "proc", "sent", "tok", "lem", "stem", "find", "get",
    "word", "book", "user", "room", "save", "load", "fetch", "rank",
]


def synthetic_index(size: int, seed: int) -> RepoIndex:
    rng = random.Random(seed)
    functions = []
    for i in range(size):
        name = "_".join(rng.choice(SYLLABLES) for _ in range(rng.randint(1, 3))) + f"_{i}"
        functions.append(
            ApiFunction(
                name=name,
                visibility=Visibility.UNSPECIFIED,
                parameters=(Parameter("x"),),
                comment=None,
                return_type=None,
                owner_entity=None,
                file="synthetic.py",
                span=(i * 10, i * 10 + 5),
            )
        )
    return RepoIndex(
        repo_root="synthetic",
        language=Language.PYTHON,
        functions=tuple(functions),
        entities=(),
        imports_by_file={},
        created_at="1970-01-01T00:00:00+00:00",
    )


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--size", type=int, default=10_000)
    parser.add_argument("--queries", type=int, default=100)
    parser.add_argument("--k", type=int, default=10)
    parser.add_argument("--seed", type=int, default=13)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    print(f"building index: {args.size} entries ...")
    build_start = time.perf_counter()
    vindex = build_vector_index(synthetic_index(args.size, args.seed), HashEmbedder())
    print(f"built in {time.perf_counter() - build_start:.2f}s")

    probes = [
        embed_hash(rng.choice(SYLLABLES) + " " + rng.choice(SYLLABLES))
        for _ in range(args.queries)
    ]
    timings = []
    for probe in probes:
        started = time.perf_counter()
        query_topk(vindex, probe, k=args.k)
        timings.append((time.perf_counter() - started) * 1000)

    timings.sort()
    median = statistics.median(timings)
    p90 = timings[int(len(timings) * 0.9) - 1]
    print(
        f"top-{args.k} over {args.size} entries, {args.queries} queries: "
        f"median={median:.2f}ms p90={p90:.2f}ms max={timings[-1]:.2f}ms"
    )
    print(f"200ms ceiling: {'OK' if median < 200 else 'EXCEEDED'}")


if __name__ == "__main__":
    main()
