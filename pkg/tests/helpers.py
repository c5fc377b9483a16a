"""Shared test utilities."""

from __future__ import annotations

import re
from pathlib import Path


def cursor_after(content: str, marker: str) -> int:
    """Byte offset just past the first occurrence of `marker`."""
    data = content.encode("utf-8")
    needle = marker.encode("utf-8")
    return data.index(needle) + len(needle)


_CREATED_AT_RE = re.compile(rb'"created_at":\s*"[^"]*"')


def strip_timestamps(data: bytes) -> bytes:
    return _CREATED_AT_RE.sub(b'"created_at": "<t>"', data)


def read_normalized(path: str | Path) -> bytes:
    return strip_timestamps(Path(path).read_bytes())
