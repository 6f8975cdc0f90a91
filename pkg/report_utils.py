"""
Report utilities
JSON reports for every CLI command and pandas summary tables
"""

import json
import logging
from typing import Any, Dict, List, Optional

import pandas as pd

from errors import BackForthError
from span_calculus import DensityVerdict, SpanFamily

logger = logging.getLogger(__name__)

ENGINE_VERSION = "1.0.0"

REPORT_KEYS = ("command", "result", "payload", "error", "timing_ms", "engine_version")


def build_report(
    command: List[str],
    result: Optional[bool],
    payload: Optional[Dict] = None,
    error: Optional[Dict] = None,
    timing_ms: float = 0.0,
) -> Dict:
    """Assemble a report with the stable key set"""
    return {
        "command": list(command),
        "result": result,
        "payload": payload or {},
        "error": error,
        "timing_ms": round(timing_ms, 3),
        "engine_version": ENGINE_VERSION,
    }


def error_report(command: List[str], exc: Exception, timing_ms: float = 0.0) -> Dict:
    if isinstance(exc, BackForthError):
        error = exc.to_dict()
    else:
        error = {"type": type(exc).__name__, "message": str(exc)}
    return build_report(command, None, None, error, timing_ms)


def render_report(report: Dict, pretty: bool = False) -> str:
    if pretty:
        return json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False)
    return json.dumps(report, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def family_payload(S: SpanFamily) -> Dict:
    return {
        "left": S.left.name,
        "right": S.right.name,
        "mode": S.mode.value,
        "size": len(S),
        "spans": S.to_list(),
    }


def density_payload(verdict: DensityVerdict, S: SpanFamily) -> Dict:
    out = verdict.to_dict(S.mode)
    out["family_size"] = len(S)
    return out


def extract_spans(data: Any) -> List[Dict]:
    """Span list from a bare JSON array, a family payload, or a whole report"""
    if isinstance(data, list):
        return data
    if isinstance(data, dict):
        if "spans" in data:
            return data["spans"]
        payload = data.get("payload") or {}
        for key in ("family", "composite", "transported"):
            if isinstance(payload.get(key), dict) and "spans" in payload[key]:
                return payload[key]["spans"]
    raise ValueError("no span family found in JSON document")


# ---------- SUMMARY TABLES ----------
SUMMARY_COLUMNS = ["criterion", "passed", "checked", "failures", "seconds", "note"]


def summary_table(rows: List[Dict]) -> pd.DataFrame:
    """One row per acceptance criterion"""
    df = pd.DataFrame(rows, columns=SUMMARY_COLUMNS)
    if not df.empty:
        df["seconds"] = df["seconds"].astype(float).round(2)
    return df


def render_summary(df: pd.DataFrame) -> str:
    if df.empty:
        return "(no criteria run)"
    return df.to_string(index=False)


def summarize_run_log(df: pd.DataFrame) -> Dict:
    """Counts and timings per subcommand from the run log"""
    try:
        if df.empty:
            return {}
        subcommand = df["command"].astype(str).str.split().str[0]
        grouped = df.groupby(subcommand).agg(runs=("exit_code", "size"), mean_ms=("timing_ms", "mean"))
        return {cmd: {"runs": int(r.runs), "mean_ms": float(r.mean_ms)} for cmd, r in grouped.iterrows()}
    except (KeyError, ValueError) as e:
        logger.warning("cannot summarize run log: %s", e)
        return {}
