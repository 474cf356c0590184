from pathlib import Path

import pytest

DATA_DIR = Path(__file__).resolve().parents[1] / "src" / "metasolve" / "data"


@pytest.fixture(scope="session")
def bundled_instance_dir() -> Path:
    return DATA_DIR / "instances"


@pytest.fixture(scope="session")
def bundled_data_dir() -> Path:
    return DATA_DIR
