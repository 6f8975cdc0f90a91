"""
Data Manager for the back-and-forth engine
Handles workspace files, span family files and the optional run log
"""

import csv
import json
import logging
import os
from datetime import datetime
from typing import Dict, List, Optional, Tuple

import pandas as pd

from config_utils import get_config
from errors import PreconditionError
from report_utils import extract_spans
from span_calculus import SpanFamily, family_from_json
from structures import CategoryMode, FinStructure
from workspace_parser import Workspace, parse_workspace

logger = logging.getLogger(__name__)

RUN_LOG_COLUMNS = ["timestamp", "command", "exit_code", "result", "timing_ms"]

# Global DataManager instance
_data_manager = None


def get_data_manager() -> "DataManager":
    """Get the global DataManager instance"""
    global _data_manager
    if _data_manager is None:
        _data_manager = DataManager()
    return _data_manager


def load_workspace(path: str) -> Workspace:
    """Global wrapper for DataManager.load_workspace"""
    return get_data_manager().load_workspace(path)


def load_family(path: str, X: FinStructure, Y: FinStructure, mode: CategoryMode) -> SpanFamily:
    """Global wrapper for DataManager.load_family"""
    return get_data_manager().load_family(path, X, Y, mode)


class DataManager:
    def __init__(self, run_log: Optional[str] = None):
        """Initialize with the run log path from configuration unless given"""
        self.run_log = run_log if run_log is not None else get_config().run_log
        self._workspaces: Dict[Tuple[str, float], Workspace] = {}
        if self.run_log:
            self._init_run_log()

    def _init_run_log(self):
        """Create the run log with its header if it doesn't exist"""
        directory = os.path.dirname(self.run_log)
        if directory:
            os.makedirs(directory, exist_ok=True)
        if not os.path.exists(self.run_log):
            with open(self.run_log, "w", newline="") as f:
                csv.writer(f).writerow(RUN_LOG_COLUMNS)

    def load_workspace(self, path: str) -> Workspace:
        """Parse a workspace file, reusing the parse while the file is unchanged"""
        key = (os.path.abspath(path), os.path.getmtime(path))
        if key not in self._workspaces:
            with open(path, "r", encoding="utf-8") as f:
                self._workspaces[key] = parse_workspace(f.read())
            logger.debug("loaded workspace %s", path)
        return self._workspaces[key]

    def load_family(self, path: str, X: FinStructure, Y: FinStructure, mode: CategoryMode) -> SpanFamily:
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
            spans = extract_spans(data)
        except json.JSONDecodeError as e:
            raise PreconditionError(f"family file {path} is not valid JSON: {e}")
        except ValueError as e:
            raise PreconditionError(f"family file {path}: {e}")
        return family_from_json(spans, X, Y, mode)

    def save_family(self, path: str, S: SpanFamily):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(S.to_list(), f, indent=2)

    def log_run(self, command: List[str], exit_code: int, result: Optional[bool], timing_ms: float):
        """Append one CLI run to the run log (no-op when logging is disabled)"""
        if not self.run_log:
            return
        with open(self.run_log, "a", newline="") as f:
            csv.writer(f).writerow(
                [datetime.now().isoformat(), " ".join(command), exit_code, result, round(timing_ms, 3)]
            )

    def load_run_log(self) -> pd.DataFrame:
        if not self.run_log or not os.path.exists(self.run_log):
            return pd.DataFrame(columns=RUN_LOG_COLUMNS)
        return pd.read_csv(self.run_log)
