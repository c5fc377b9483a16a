"""Run configuration shared by the CLI commands."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import SchemaError
from .model import Language


@dataclass
class RunConfig:
    language: Language = Language.PYTHON
    embedder: str = "hash"  # hash | remote
    llm: str = "mock"  # mock | remote
    k: int = 10
    token_budget: int = 3000
    cache_dir: str = field(
        default_factory=lambda: os.environ.get("LANCEKIT_CACHE_DIR", ".lancekit-cache")
    )
    exclude_globs: tuple[str, ...] = ()
    model: str | None = None
    max_calls: int | None = None
    include_cached_latency: bool = False

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        """Optional JSON config file; command-line flags override its values."""
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise SchemaError(f"cannot read config file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed config file {path}: {exc.msg}") from exc
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise SchemaError(f"unknown config keys: {sorted(unknown)}")
        config = cls()
        for key, value in raw.items():
            if key == "language":
                value = Language(value)
            elif key == "exclude_globs":
                value = tuple(value)
            setattr(config, key, value)
        return config
