from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from cajux.core import CoveringArray
from cajux.store import read_ca

DATA = Path(__file__).parent / "data"

settings.register_profile(
    "repo", derandomize=True, deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))

EXTENDED = os.environ.get("CAJUX_EXTENDED") == "1"


def scramble(A: CoveringArray, rng: np.random.Generator) -> CoveringArray:
    """A random isomorph: shuffle rows and columns, relabel every column."""
    cells = A.cells[rng.permutation(A.N)][:, rng.permutation(A.k)]
    for c in range(A.k):
        cells[:, c] = rng.permutation(A.v)[cells[:, c]]
    return CoveringArray(cells, A.v, A.t)


@pytest.fixture(scope="session")
def ca54() -> CoveringArray:
    return read_ca(DATA / "ca_54_5_9_2.ca")


@pytest.fixture(scope="session")
def ca33() -> CoveringArray:
    return read_ca(DATA / "ca_33_3_6_3.ca")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_ACCEPTANCE: list[str] = []


def record_acceptance(line: str) -> None:
    _ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
