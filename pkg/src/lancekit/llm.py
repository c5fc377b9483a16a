"""Chat-completion backends behind one gateway: a remote HTTP client and a
deterministic offline mock, with response caching, retries, a per-run call
budget, and rate limiting."""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

from .errors import AuthError, BudgetExceededError, EmptyContextError, ServiceError

LLM_URL_VAR = "LANCEKIT_LLM_URL"
LLM_KEY_VAR = "LANCEKIT_LLM_KEY"

# Config defaults for hosted chat backends (plain strings, fully overridable).
DEFAULT_CHAT_MODEL = "gpt-3.5-turbo-0125"
ALTERNATE_CHAT_MODEL = "gpt-4-0613"


@dataclass(frozen=True)
class LlmResponse:
    text: str
    latency_ms: int
    backend_id: str
    from_cache: bool = False

    def __post_init__(self) -> None:
        if self.latency_ms < 0:
            raise ValueError("latency_ms must be >= 0")


class LlmClient(Protocol):
    id: str
    temperature: float

    def complete(self, bundle) -> LlmResponse: ...


def mock_complete(bundle) -> LlmResponse:
    """Render the bundle's top-ranked candidate as a call expression, using
    the candidate's own parameter names as arguments."""
    calls = getattr(bundle, "calls", ())
    if not calls:
        raise EmptyContextError("mock completion needs at least one candidate")
    return LlmResponse(text=calls[0], latency_ms=0, backend_id="mock")


@dataclass(frozen=True)
class MockLlmClient:
    id: str = "mock"
    temperature: float = 0.0

    def complete(self, bundle) -> LlmResponse:
        return mock_complete(bundle)


def _default_transport(url: str, payload: dict, headers: dict, timeout: float) -> dict:
    import requests

    response = requests.post(url, json=payload, headers=headers, timeout=timeout)
    if response.status_code in (401, 403):
        raise AuthError(f"chat service rejected credentials ({response.status_code})")
    if response.status_code >= 400:
        raise ServiceError(f"chat service returned {response.status_code}")
    return response.json()


class RemoteLlmClient:
    """POSTs {model, temperature, messages} and returns the first choice."""

    MAX_ATTEMPTS = 3

    def __init__(
        self,
        model: str = DEFAULT_CHAT_MODEL,
        temperature: float = 0.0,
        transport: Callable[[str, dict, dict, float], dict] | None = None,
        backoff_base_s: float = 0.5,
    ):
        self.model = model
        self.temperature = temperature
        self._transport = transport or _default_transport
        self._backoff_base_s = backoff_base_s
        self.network_calls = 0

    @property
    def id(self) -> str:
        return self.model

    def complete(self, bundle) -> LlmResponse:
        url = os.environ.get(LLM_URL_VAR)
        key = os.environ.get(LLM_KEY_VAR)
        if not url or not key:
            raise AuthError(f"remote completion needs {LLM_URL_VAR} and {LLM_KEY_VAR} set")
        payload = {
            "model": self.model,
            "temperature": self.temperature,
            "messages": [
                {"role": "system", "content": bundle.system_text},
                {"role": "user", "content": bundle.user_text},
            ],
        }
        headers = {"Authorization": f"Bearer {key}"}
        started = time.monotonic()
        body = self._call_with_retry(url, payload, headers)
        latency_ms = int((time.monotonic() - started) * 1000)
        try:
            text = body["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise ServiceError(f"malformed chat response: {exc}") from exc
        return LlmResponse(text=text, latency_ms=latency_ms, backend_id=self.id)

    def _call_with_retry(self, url: str, payload: dict, headers: dict) -> dict:
        last: Exception | None = None
        for attempt in range(self.MAX_ATTEMPTS):
            try:
                self.network_calls += 1
                return self._transport(url, payload, headers, 60.0)
            except AuthError:
                raise
            except Exception as exc:  # noqa: BLE001 - retry then surface as ServiceError
                last = exc
                if attempt < self.MAX_ATTEMPTS - 1:
                    time.sleep(self._backoff_base_s * (2**attempt))
        raise ServiceError(f"chat request failed after {self.MAX_ATTEMPTS} attempts: {last}")


class RateLimiter:
    def __init__(self, rate_per_s: float = 2.0):
        self._min_interval = 1.0 / rate_per_s if rate_per_s > 0 else 0.0
        self._lock = threading.Lock()
        self._last = 0.0

    def wait(self) -> None:
        with self._lock:
            now = time.monotonic()
            delay = self._last + self._min_interval - now
            if delay > 0:
                time.sleep(delay)
                now = time.monotonic()
            self._last = now


def bundle_fingerprint(bundle) -> str:
    payload = json.dumps(
        {"system": bundle.system_text, "user": bundle.user_text}, sort_keys=True
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class LlmGateway:
    """Serializes backend calls, enforces the call budget, and caches
    responses keyed by (backend id, bundle fingerprint)."""

    def __init__(
        self,
        client: LlmClient,
        cache_dir: str | Path | None = None,
        max_calls: int | None = None,
        rate_per_s: float = 2.0,
    ):
        self.client = client
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.max_calls = max_calls
        self.calls_made = 0
        self._limiter = RateLimiter(rate_per_s)
        self._lock = threading.Lock()

    @property
    def id(self) -> str:
        return self.client.id

    @property
    def temperature(self) -> float:
        return self.client.temperature

    def _cache_path(self, bundle) -> Path | None:
        if self.cache_dir is None:
            return None
        digest = hashlib.sha256(
            f"{self.client.id}\x00{bundle_fingerprint(bundle)}".encode("utf-8")
        ).hexdigest()
        return self.cache_dir / "llm" / digest[:2] / f"{digest}.json"

    def complete(self, bundle) -> LlmResponse:
        cache_path = self._cache_path(bundle)
        if cache_path is not None and cache_path.exists():
            record = json.loads(cache_path.read_text(encoding="utf-8"))
            return LlmResponse(
                text=record["text"],
                latency_ms=record["latency_ms"],
                backend_id=record["backend_id"],
                from_cache=True,
            )

        with self._lock:
            if self.max_calls is not None and self.calls_made >= self.max_calls:
                raise BudgetExceededError(
                    f"per-run call budget of {self.max_calls} reached"
                )
            self.calls_made += 1
        self._limiter.wait()
        response = self.client.complete(bundle)

        if cache_path is not None:
            cache_path.parent.mkdir(parents=True, exist_ok=True)
            tmp = cache_path.with_suffix(".tmp")
            tmp.write_text(
                json.dumps(
                    {
                        "text": response.text,
                        "latency_ms": response.latency_ms,
                        "backend_id": response.backend_id,
                    }
                ),
                encoding="utf-8",
            )
            os.replace(tmp, cache_path)
        return response


def complete(client: LlmClient, bundle, gateway: LlmGateway | None = None) -> LlmResponse:
    """One completion call; goes through `gateway` when provided (cache,
    budget, rate limit), otherwise straight to the client."""
    if gateway is not None:
        return gateway.complete(bundle)
    return client.complete(bundle)
