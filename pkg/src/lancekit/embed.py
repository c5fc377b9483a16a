"""Text embedders: a deterministic feature-hashing embedder for offline use
and a remote HTTP embedder with an on-disk response cache."""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

from .errors import AuthError, EmptyTextError, ServiceError

HASH_DIMENSION = 256

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1

EMBED_URL_VAR = "LANCEKIT_EMBED_URL"
EMBED_KEY_VAR = "LANCEKIT_EMBED_KEY"
DEFAULT_EMBED_MODEL = "text-embedding-ada-002"


@dataclass(frozen=True)
class EmbeddingVector:
    """L2-normalized fixed-dimension vector."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        norm = math.sqrt(sum(v * v for v in self.values))
        if abs(norm - 1.0) >= 1e-6:
            raise ValueError(f"vector is not unit length (norm={norm!r})")

    @property
    def dimension(self) -> int:
        return len(self.values)


class Embedder(Protocol):
    id: str
    dimension: int

    def embed(self, text: str) -> EmbeddingVector: ...


def subtokenize(text: str) -> list[str]:
    """Split on '_', '.', digits, camel lower-to-upper boundaries, and any
    other non-letter character; subtokens are lowercased."""
    tokens: list[str] = []
    current: list[str] = []
    prev = ""
    for ch in text:
        if not (ch.isascii() and ch.isalpha()):
            if current:
                tokens.append("".join(current).lower())
                current = []
            prev = ch
            continue
        if current and prev.islower() and ch.isupper():
            tokens.append("".join(current).lower())
            current = []
        current.append(ch)
        prev = ch
    if current:
        tokens.append("".join(current).lower())
    return tokens


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _normalized(values: list[float]) -> EmbeddingVector:
    norm = math.sqrt(sum(v * v for v in values))
    if norm == 0.0:
        raise EmptyTextError("embedding accumulated to the zero vector")
    return EmbeddingVector(values=tuple(v / norm for v in values))


def embed_hash(text: str, dimension: int = HASH_DIMENSION) -> EmbeddingVector:
    """Deterministic feature-hash embedding: each subtoken and each of its
    character trigrams is FNV-1a-64 hashed into a signed bucket."""
    subtokens = subtokenize(text)
    if not subtokens:
        raise EmptyTextError(f"no subtokens in {text!r}")
    accumulator = [0.0] * dimension
    for token in subtokens:
        features = [token]
        features.extend(token[i : i + 3] for i in range(len(token) - 2))
        for feature in features:
            h = fnv1a64(feature.encode("utf-8"))
            bucket = h % dimension
            sign = 1.0 if (h >> 63) & 1 == 0 else -1.0
            accumulator[bucket] += sign
    return _normalized(accumulator)


@dataclass(frozen=True)
class HashEmbedder:
    dimension: int = HASH_DIMENSION

    @property
    def id(self) -> str:
        return f"hash-{self.dimension}"

    def embed(self, text: str) -> EmbeddingVector:
        return embed_hash(text, self.dimension)


def _default_transport(url: str, payload: dict, headers: dict, timeout: float) -> dict:
    import requests

    response = requests.post(url, json=payload, headers=headers, timeout=timeout)
    if response.status_code == 401 or response.status_code == 403:
        raise AuthError(f"embedding service rejected credentials ({response.status_code})")
    if response.status_code >= 400:
        raise ServiceError(f"embedding service returned {response.status_code}")
    return response.json()


class RemoteEmbedder:
    """HTTP embedder; responses cached on disk keyed by (model, text) so
    repeated runs are offline-reproducible."""

    MAX_ATTEMPTS = 3

    def __init__(
        self,
        model: str = DEFAULT_EMBED_MODEL,
        dimension: int = 1536,
        cache_dir: str | Path | None = None,
        transport: Callable[[str, dict, dict, float], dict] | None = None,
        backoff_base_s: float = 0.5,
    ):
        self.model = model
        self.dimension = dimension
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self._transport = transport or _default_transport
        self._backoff_base_s = backoff_base_s
        self.network_calls = 0

    @property
    def id(self) -> str:
        return f"remote-{self.model}"

    def _cache_path(self, text: str) -> Path | None:
        if self.cache_dir is None:
            return None
        digest = hashlib.sha256(f"{self.model}\x00{text}".encode("utf-8")).hexdigest()
        return self.cache_dir / "embed" / digest[:2] / f"{digest}.json"

    def embed(self, text: str) -> EmbeddingVector:
        if not subtokenize(text):
            raise EmptyTextError(f"no subtokens in {text!r}")
        cache_path = self._cache_path(text)
        if cache_path is not None and cache_path.exists():
            values = json.loads(cache_path.read_text(encoding="utf-8"))["embedding"]
            return _normalized([float(v) for v in values])

        url = os.environ.get(EMBED_URL_VAR)
        key = os.environ.get(EMBED_KEY_VAR)
        if not url or not key:
            raise AuthError(
                f"remote embedding needs {EMBED_URL_VAR} and {EMBED_KEY_VAR} set"
            )
        payload = {"model": self.model, "input": text}
        headers = {"Authorization": f"Bearer {key}"}
        body = self._call_with_retry(url, payload, headers)
        values = [float(v) for v in body["embedding"]]
        vector = _normalized(values)
        if cache_path is not None:
            cache_path.parent.mkdir(parents=True, exist_ok=True)
            tmp = cache_path.with_suffix(".tmp")
            tmp.write_text(
                json.dumps({"embedding": list(vector.values)}), encoding="utf-8"
            )
            os.replace(tmp, cache_path)  # atomic single-writer publish
        return vector

    def _call_with_retry(self, url: str, payload: dict, headers: dict) -> dict:
        last: Exception | None = None
        for attempt in range(self.MAX_ATTEMPTS):
            try:
                self.network_calls += 1
                return self._transport(url, payload, headers, 30.0)
            except AuthError:
                raise
            except Exception as exc:  # noqa: BLE001 - retry then surface as ServiceError
                last = exc
                if attempt < self.MAX_ATTEMPTS - 1:
                    time.sleep(self._backoff_base_s * (2**attempt))
        raise ServiceError(f"embedding request failed after {self.MAX_ATTEMPTS} attempts: {last}")
