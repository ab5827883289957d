from __future__ import annotations

import pathlib

import pytest

from sccpe import Solver

PROGRAMS = pathlib.Path(__file__).resolve().parent.parent / "programs"


@pytest.fixture
def solver() -> Solver:
    return Solver()


@pytest.fixture(scope="session")
def message_text() -> str:
    return (PROGRAMS / "message.sccp").read_text()


@pytest.fixture(scope="session")
def spaces_text() -> str:
    return (PROGRAMS / "spaces.sccp").read_text()
