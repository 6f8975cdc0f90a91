from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from config_utils import get_config
from span_calculus import clear_cache
from workspace_parser import parse_workspace

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

settings.register_profile(
    "engine", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("engine")


@pytest.fixture(autouse=True)
def _fresh_config(monkeypatch):
    for key in ("BFCALC_MAX_CARRIER", "BFCALC_MAX_ARITY", "BFCALC_MAX_SPANS", "BFCALC_RUN_LOG"):
        monkeypatch.delenv(key, raising=False)
    get_config.cache_clear()
    yield
    get_config.cache_clear()


@pytest.fixture(scope="session")
def examples_path() -> Path:
    return DATA_DIR / "examples.bf"


@pytest.fixture(scope="session")
def groups_path() -> Path:
    return DATA_DIR / "groups.bf"


@pytest.fixture(scope="session")
def examples(examples_path):
    return parse_workspace(examples_path.read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def groups(groups_path):
    return parse_workspace(groups_path.read_text(encoding="utf-8"))


@pytest.fixture
def cold_cache():
    clear_cache()
    yield
    clear_cache()
