import json
from pathlib import Path

import pytest

from lancekit.embed import HashEmbedder
from lancekit.extract import index_repository
from lancekit.vindex import build_vector_index

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def pyrepo() -> Path:
    return FIXTURES / "pyrepo"


@pytest.fixture(scope="session")
def javarepo() -> Path:
    return FIXTURES / "javarepo"


@pytest.fixture(scope="session")
def py_index(pyrepo):
    return index_repository(pyrepo, "python")


@pytest.fixture(scope="session")
def java_index(javarepo):
    return index_repository(javarepo, "java")


@pytest.fixture(scope="session")
def py_vindex(py_index):
    return build_vector_index(py_index, HashEmbedder())


@pytest.fixture(scope="session")
def java_vindex(java_index):
    return build_vector_index(java_index, HashEmbedder())


@pytest.fixture(scope="session")
def py_manifest():
    return json.loads((FIXTURES / "pyrepo_manifest.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def java_manifest():
    return json.loads((FIXTURES / "javarepo_manifest.json").read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def main_py(pyrepo) -> str:
    return (pyrepo / "hotel_management_system.py").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def main_java(javarepo) -> str:
    return (javarepo / "app" / "HotelManagementSystem.java").read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def py_tasks_path() -> Path:
    return FIXTURES / "tasks_py.jsonl"


@pytest.fixture(scope="session")
def java_tasks_path() -> Path:
    return FIXTURES / "tasks_java.jsonl"
