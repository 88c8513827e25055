from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parent.parent
SCENARIO_DIR = REPO_ROOT / "scenarios"


@pytest.fixture(scope="session")
def scenario_dir() -> Path:
    return SCENARIO_DIR


@pytest.fixture(scope="session")
def sim1_path() -> Path:
    return SCENARIO_DIR / "sim1.yaml"


@pytest.fixture(scope="session")
def sim2_path() -> Path:
    return SCENARIO_DIR / "sim2.yaml"
