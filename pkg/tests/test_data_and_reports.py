import json

import pandas as pd
import pytest

from config_utils import DEFAULT_MAX_CARRIER, get_config, get_setting
from data_manager import DataManager
from errors import PreconditionError, WorkspaceSyntaxError
from report_utils import (
    build_report,
    error_report,
    extract_spans,
    render_report,
    render_summary,
    summarize_run_log,
    summary_table,
)
from span_calculus import greatest_dense_family
from structures import CategoryMode


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("BFCALC_MAX_CARRIER", "5")
    get_config.cache_clear()
    assert get_config().max_carrier == 5
    monkeypatch.setenv("BFCALC_MAX_CARRIER", "many")
    assert get_setting("BFCALC_MAX_CARRIER", DEFAULT_MAX_CARRIER, int) == DEFAULT_MAX_CARRIER
    assert get_setting("BFCALC_UNSET_KEY", "fallback") == "fallback"


def test_defaults():
    config = get_config()
    assert config.max_carrier == DEFAULT_MAX_CARRIER
    assert config.run_log == ""


def test_reports_are_stable_json():
    report = build_report(["equiv"], True, {"b": 1, "a": 2}, None, 1.23456)
    assert report["timing_ms"] == 1.235
    text = render_report(report)
    assert text.startswith('{"command":["equiv"]')
    assert json.loads(render_report(report, pretty=True)) == report


def test_error_report_keeps_positions():
    report = error_report(["check"], WorkspaceSyntaxError("bad clause", 3, 7))
    assert report["result"] is None
    assert report["error"] == {"type": "WorkspaceSyntaxError", "message": "bad clause (line 3, column 7)", "line": 3, "column": 7}
    assert error_report(["x"], ValueError("boom"))["error"] == {"type": "ValueError", "message": "boom"}


def test_extract_spans_accepts_reports_and_lists():
    spans = [{"domain": [0], "map": [1]}]
    assert extract_spans(spans) == spans
    assert extract_spans({"spans": spans}) == spans
    assert extract_spans({"payload": {"composite": {"spans": spans}}}) == spans
    with pytest.raises(ValueError):
        extract_spans({"payload": {}})


def test_family_files_round_trip(tmp_path, examples):
    tri, tri2 = examples.structure("tri"), examples.structure("tri2")
    S = greatest_dense_family(tri, tri2, CategoryMode.STR)
    manager = DataManager(run_log="")
    path = tmp_path / "family.json"
    manager.save_family(str(path), S)
    assert manager.load_family(str(path), tri, tri2, CategoryMode.STR).spans == S.spans


def test_family_files_are_validated(tmp_path, examples):
    tri = examples.structure("tri")
    path = tmp_path / "family.json"
    path.write_text(json.dumps([{"domain": [0, 1], "map": [1]}]), encoding="utf-8")
    with pytest.raises(PreconditionError, match="different lengths"):
        DataManager(run_log="").load_family(str(path), tri, tri, CategoryMode.EMB)
    path.write_text(json.dumps({"nothing": []}), encoding="utf-8")
    with pytest.raises(PreconditionError, match="no span family"):
        DataManager(run_log="").load_family(str(path), tri, tri, CategoryMode.EMB)


def test_workspace_cache_follows_the_file(tmp_path):
    path = tmp_path / "ws.bf"
    path.write_text("rel E/2\nstructure A : 1\n", encoding="utf-8")
    manager = DataManager(run_log="")
    first = manager.load_workspace(str(path))
    assert manager.load_workspace(str(path)) is first


def test_run_log_summary(tmp_path):
    log = tmp_path / "logs" / "runs.csv"
    manager = DataManager(run_log=str(log))
    assert manager.load_run_log().empty
    manager.log_run(["equiv", "ws.bf"], 0, True, 12.0)
    manager.log_run(["equiv", "ws.bf"], 1, False, 8.0)
    df = manager.load_run_log()
    assert len(df) == 2
    manager.log_run(["check", "ws.bf", "--theory", "groups"], 0, True, 4.0)
    assert summarize_run_log(manager.load_run_log()) == {
        "check": {"runs": 1, "mean_ms": 4.0},
        "equiv": {"runs": 2, "mean_ms": 10.0},
    }
    assert summarize_run_log(pd.DataFrame()) == {}


def test_summary_table():
    rows = [{"criterion": "grid", "passed": True, "checked": 3, "failures": "", "seconds": 0.123, "note": ""}]
    df = summary_table(rows)
    assert list(df.columns) == ["criterion", "passed", "checked", "failures", "seconds", "note"]
    assert df.loc[0, "seconds"] == 0.12
    assert "grid" in render_summary(df)
    assert render_summary(summary_table([])) == "(no criteria run)"
