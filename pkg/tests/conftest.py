from __future__ import annotations

import json
from pathlib import Path

import pytest

from ozva.coalgebra import build_tower, load_algebra
from ozva.vertexbuild import VertexTruncation

INPUTS = Path(__file__).resolve().parent.parent / "inputs"


def algebra_doc(name: str) -> dict:
    return json.loads((INPUTS / name).read_text())


@pytest.fixture(scope="session")
def vir_doc():
    return algebra_doc("virasoro_c10.json")


@pytest.fixture(scope="session")
def two_doc():
    return algebra_doc("two_dim.json")


@pytest.fixture(scope="session")
def vir_alg(vir_doc):
    return load_algebra(vir_doc)


@pytest.fixture(scope="session")
def two_alg(two_doc):
    return load_algebra(two_doc)


@pytest.fixture(scope="session")
def vir_tower(vir_alg):
    return build_tower(vir_alg, 4)


@pytest.fixture(scope="session")
def two_tower(two_alg):
    return build_tower(two_alg, 4)


@pytest.fixture(scope="session")
def vir_T(vir_tower):
    return VertexTruncation(vir_tower, 4, 6)


@pytest.fixture(scope="session")
def two_T(two_tower):
    return VertexTruncation(two_tower, 4, 6)
