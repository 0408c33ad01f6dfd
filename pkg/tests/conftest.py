import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from ssmap import parse_model

MODELS = Path(__file__).parent.parent / "models"


@pytest.fixture(scope="session")
def models_dir() -> Path:
    return MODELS


@pytest.fixture(scope="session")
def toy_text() -> str:
    return (MODELS / "toy.model").read_text()


@pytest.fixture(scope="session")
def toy_doc(toy_text):
    return parse_model(toy_text, name_hint="toy")


@pytest.fixture(scope="session")
def toy_hill(toy_doc):
    """Toy system with every exponent at 2."""
    return toy_doc.build_hill()


@pytest.fixture(scope="session")
def toy_scheme(toy_doc):
    return toy_doc.scheme()


@pytest.fixture(scope="session")
def toy_mn(toy_doc):
    return toy_doc.table


@pytest.fixture(scope="session")
def toy_space(toy_doc):
    return toy_doc.space


@pytest.fixture(scope="session")
def nine_doc():
    return parse_model((MODELS / "repressor9.model").read_text(), name_hint="repressor9")


@pytest.fixture(scope="session")
def nine_scheme(nine_doc):
    return nine_doc.scheme()
