"""
Report Collector
================
Serializes the CheckReports of a suite run. Checks may run concurrently; all
of them hand their reports to one collector, which is the only writer of the
report file.
"""

import json
import logging
import os
import threading
from collections.abc import Iterable
from datetime import datetime
from pathlib import Path
from typing import Any

import pandas as pd

from .verifier import CheckReport

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = [
    'check_id',
    'verdict',
    'max_residual',
    'mean_residual',
    'tolerance',
    'n_cases',
    'n_failed',
    'wall_time_ms',
]


class ReportCollector:
    """
    Append-only collector for the reports of one suite run.

    Features:
    - Thread-safe appends from concurrent checks
    - Session id and start timestamp recorded for the run
    - Single JSON array output, written atomically
    - pandas summary table of the collected reports
    """

    def __init__(self, output_path: str | Path | None = None):
        self._lock = threading.Lock()
        self._reports: list[CheckReport] = []
        self.session_id = self._generate_session_id()
        self.started_at = datetime.now().isoformat()
        self.output_path = Path(output_path) if output_path else None

    def _generate_session_id(self) -> str:
        """Generate unique session ID based on timestamp."""
        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S_%f')
        return f'session_{timestamp}'

    def add(self, report: CheckReport) -> None:
        with self._lock:
            self._reports.append(report)
        level = logging.INFO if report.passed else logging.WARNING
        logger.log(level, f'{report.check_id}: {report.verdict} (max residual {report.residuals.max:.2e})')

    def extend(self, reports: Iterable[CheckReport]) -> None:
        for report in reports:
            self.add(report)

    @property
    def reports(self) -> tuple[CheckReport, ...]:
        with self._lock:
            return tuple(self._reports)

    def __len__(self) -> int:
        with self._lock:
            return len(self._reports)

    def all_passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def exit_status(self) -> int:
        """0 when every verdict passed, 1 otherwise."""
        return 0 if self.all_passed() else 1

    def to_list(self) -> list[dict[str, Any]]:
        return [r.model_dump(mode='json') for r in self.reports]

    def write(self, path: str | Path | None = None) -> Path:
        """
        Write the collected reports as one JSON array.

        The file is written to a temporary sibling and moved into place, so a reader
        never sees a partial report.
        """
        target = Path(path) if path else self.output_path
        if target is None:
            from config.config import ConfigWorkbench

            target = ConfigWorkbench.get_default_report_path()
        target.parent.mkdir(parents=True, exist_ok=True)
        tmp = target.with_name(target.name + '.tmp')
        with self._lock:
            payload = [r.model_dump(mode='json') for r in self._reports]
            with open(tmp, 'w', encoding='utf-8') as f:
                json.dump(payload, f, indent=2, ensure_ascii=False)
                f.write('\n')
            os.replace(tmp, target)
        logger.info(f'Wrote {len(payload)} reports to {target} ({self.session_id})')
        return target

    def summary(self) -> pd.DataFrame:
        return summarize_reports(self.reports)


def summarize_reports(reports: Iterable[CheckReport]) -> pd.DataFrame:
    """One row per report with verdict, residual statistics and timing."""
    rows = []
    for r in reports:
        rows.append(
            {
                'check_id': r.check_id,
                'verdict': r.verdict,
                'max_residual': r.residuals.max,
                'mean_residual': r.residuals.mean,
                'tolerance': r.tolerance,
                'n_cases': len(r.residuals.per_case),
                'n_failed': len(r.failed_cases()),
                'wall_time_ms': r.wall_time_ms,
            }
        )
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


def write_summary_csv(reports: Iterable[CheckReport], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    summarize_reports(reports).to_csv(path, index=False, encoding='utf-8')
    logger.info(f'Wrote summary table to {path}')
    return path


def load_reports(path: str | Path) -> list[CheckReport]:
    """Read a report array written by ReportCollector.write."""
    with open(path, encoding='utf-8') as f:
        data = json.load(f)
    return [CheckReport.model_validate(item) for item in data]
