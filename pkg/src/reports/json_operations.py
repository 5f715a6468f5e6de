import json
import os
from datetime import datetime
from typing import Dict, List, Optional

import pandas as pd
from pydantic import BaseModel

from reports.models import SCHEMA_VERSION, CheckRow

CSV_COLUMNS = ["check", "residual", "tolerance", "pass"]


class ReportStore:
    def __init__(self, report_dir: Optional[str] = None):
        self.report_dir = report_dir or os.getenv("MOB_RKHS_REPORT_DIR", "reports")

        # Create report directory if it doesn't exist
        os.makedirs(self.report_dir, exist_ok=True)

    def _default_path(self, stem: str, suffix: str) -> str:
        timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
        return os.path.join(self.report_dir, f"{stem}_{timestamp}.{suffix}")

    def _prepare(self, path: str):
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)

    def save_report(self, report: BaseModel, path: Optional[str] = None, stem: str = "report") -> str:
        """Write a report model as JSON and return the path"""
        path = path or self._default_path(stem, "json")
        self._prepare(path)
        with open(path, "w") as f:
            f.write(report.model_dump_json(indent=2, by_alias=True))
        return path

    def load_report(self, path: str) -> Dict:
        """Load a JSON report, rejecting unknown schema versions"""
        with open(path, "r") as f:
            data = json.load(f)
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"{path}: unsupported schema_version {data.get('schema_version')}")
        return data

    def checks_frame(self, rows: List[CheckRow]) -> pd.DataFrame:
        records = [row.model_dump(by_alias=True) for row in rows]
        return pd.DataFrame(records, columns=CSV_COLUMNS)

    def save_checks(self, rows: List[CheckRow], path: Optional[str] = None) -> str:
        """Write check rows as CSV preceded by a schema comment line"""
        path = path or self._default_path("checks", "csv")
        self._prepare(path)
        with open(path, "w") as f:
            f.write(f"# schema_version: {SCHEMA_VERSION}\n")
            self.checks_frame(rows).to_csv(f, index=False)
        return path

    def load_checks(self, path: str) -> pd.DataFrame:
        return pd.read_csv(path, comment="#")
