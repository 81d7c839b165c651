from __future__ import annotations

from pathlib import Path

import pytest

from robust_mrcpsp.milp import LIGHT_HEURISTICS, BranchAndBoundBackend, HighsBackend

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def highs():
    backend = HighsBackend(options=LIGHT_HEURISTICS)
    if not backend.available():
        pytest.skip("highspy not installed")
    return backend


@pytest.fixture(scope="session")
def bnb():
    return BranchAndBoundBackend()


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES
