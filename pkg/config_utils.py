import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Optional

from dotenv import load_dotenv

# ---------- DEFAULTS ----------
DEFAULT_MAX_CARRIER = 8
DEFAULT_MAX_ARITY = 3
DEFAULT_MAX_SPANS = 250_000
DEFAULT_LOG_LEVEL = "WARNING"
DEFAULT_SEED = 20240601

_dotenv_loaded = False


def get_setting(key: str, default: Any = None, cast: Optional[Callable[[str], Any]] = None) -> Any:
    """Read a setting from the environment (after .env), falling back to default"""
    global _dotenv_loaded
    if not _dotenv_loaded:
        load_dotenv()
        _dotenv_loaded = True
    raw = os.getenv(key)
    if raw is None or raw == "":
        return default
    if cast is None:
        return raw
    try:
        return cast(raw)
    except ValueError:
        return default


@dataclass(frozen=True)
class EngineConfig:
    max_carrier: int = DEFAULT_MAX_CARRIER
    max_arity: int = DEFAULT_MAX_ARITY
    max_spans: int = DEFAULT_MAX_SPANS
    log_level: str = DEFAULT_LOG_LEVEL
    seed: int = DEFAULT_SEED
    run_log: str = ""


@lru_cache(maxsize=1)
def get_config() -> EngineConfig:
    """Get the global engine configuration"""
    return EngineConfig(
        max_carrier=get_setting("BFCALC_MAX_CARRIER", DEFAULT_MAX_CARRIER, int),
        max_arity=get_setting("BFCALC_MAX_ARITY", DEFAULT_MAX_ARITY, int),
        max_spans=get_setting("BFCALC_MAX_SPANS", DEFAULT_MAX_SPANS, int),
        log_level=str(get_setting("BFCALC_LOG_LEVEL", DEFAULT_LOG_LEVEL)).upper(),
        seed=get_setting("BFCALC_SEED", DEFAULT_SEED, int),
        run_log=get_setting("BFCALC_RUN_LOG", ""),
    )
