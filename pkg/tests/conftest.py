# tests/conftest.py
from __future__ import annotations

from pathlib import Path

import pytest

from group_pipeline.homology import abelianization_data
from group_pipeline.presentation import Presentation, parse_manifold

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def load(name: str) -> Presentation:
    return parse_manifold(FIXTURES / f"{name}.json")


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def trefoil() -> Presentation:
    return load("trefoil")


@pytest.fixture
def figure8() -> Presentation:
    return load("figure8")


@pytest.fixture
def torsion10() -> Presentation:
    return load("torsion10")


@pytest.fixture
def trefoil_h(trefoil):
    return abelianization_data(trefoil)


@pytest.fixture
def figure8_h(figure8):
    return abelianization_data(figure8)
