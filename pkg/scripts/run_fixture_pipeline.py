#!/usr/bin/env python3
"""End-to-end demo over the bundled fixture repos, fully offline.

Indexes the Python and Java fixture repositories, runs the two showcase
completion requests with the mock backend, and evaluates the bundled task
files, printing the metric lines.
"""

from __future__ import annotations

import sys
import tempfile
from pathlib import Path

from lancekit.cli import main as cli

REPO_ROOT = Path(__file__).resolve().parent.parent
FIXTURES = REPO_ROOT / "tests" / "fixtures"


def cursor_after(path: Path, marker: str) -> int:
    data = path.read_bytes()
    return data.index(marker.encode("utf-8")) + len(marker.encode("utf-8"))


def run(argv: list[str]) -> None:
    print(f"$ lancekit {' '.join(argv)}")
    code = cli(argv)
    if code != 0:
        sys.exit(code)
    print()


def main() -> None:
    with tempfile.TemporaryDirectory() as tmp:
        work = Path(tmp)
        py_index = work / "pyrepo.idx"
        java_index = work / "javarepo.idx"
        cache = str(work / "cache")

        run(["index", str(FIXTURES / "pyrepo"), "--lang", "python", "--out", str(py_index)])
        run(["index", str(FIXTURES / "javarepo"), "--lang", "java", "--out", str(java_index)])

        site = cursor_after(FIXTURES / "pyrepo" / "hotel_management_system.py", "sentiment = tp.")
        run(
            [
                "complete", "token",
                "--index", str(py_index),
                "--file", "hotel_management_system.py",
                "--cursor", str(site),
                "--explain",
                "--cache-dir", cache,
            ]
        )
        run(
            [
                "complete", "query",
                "--index", str(py_index),
                "--query", "how to process payment with PaymentProcessor?",
                "--file", "hotel_management_system.py",
                "--cache-dir", cache,
            ]
        )
        run(
            [
                "eval",
                "--index", str(py_index),
                "--tasks", str(FIXTURES / "tasks_py.jsonl"),
                "--report", str(work / "report_py.json"),
                "--cache-dir", cache,
            ]
        )
        run(
            [
                "eval",
                "--index", str(java_index),
                "--tasks", str(FIXTURES / "tasks_java.jsonl"),
                "--report", str(work / "report_java.json"),
                "--cache-dir", cache,
            ]
        )


if __name__ == "__main__":
    main()
