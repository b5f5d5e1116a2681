"""Tests for ReportCollector and the summary table."""

import json
import threading

import pytest

from core.report_collector import SUMMARY_COLUMNS, ReportCollector, load_reports, summarize_reports, write_summary_csv
from core.verifier import CaseResult, CheckReport, ResidualSummary


def _report(check_id: str, residual: float, tolerance: float = 1e-6) -> CheckReport:
    passed = residual <= tolerance
    case = CaseResult(case='c', residual=residual, tolerance=tolerance, passed=passed)
    return CheckReport(
        check_id=check_id,
        residuals=ResidualSummary(max=residual, mean=residual, per_case=[case]),
        tolerance=tolerance,
        verdict='pass' if passed else 'fail',
        wall_time_ms=1.0,
        seed=0,
    )


@pytest.fixture
def collector(tmp_path):
    return ReportCollector(tmp_path / 'reports' / 'report.json')


class TestReportCollector:
    def test_session_id_format(self, collector):
        assert collector.session_id.startswith('session_')
        assert len(collector.session_id) > 8

    def test_exit_status(self, collector):
        collector.add(_report('ccr', 1e-12))
        assert collector.exit_status() == 0
        collector.add(_report('norm_law', 1.0))
        assert collector.exit_status() == 1
        assert not collector.all_passed()

    def test_write_and_load(self, collector):
        collector.extend([_report('ccr', 1e-12), _report('susy_core', 2e-7)])
        path = collector.write()
        assert path.exists()
        assert not path.with_name(path.name + '.tmp').exists()
        data = json.loads(path.read_text(encoding='utf-8'))
        assert [item['check_id'] for item in data] == ['ccr', 'susy_core']
        loaded = load_reports(path)
        assert loaded[1].residuals.max == pytest.approx(2e-7)

    def test_default_path_from_env(self, tmp_path):
        path = ReportCollector().write()
        assert path == tmp_path / 'reports' / 'report.json'

    def test_concurrent_adds(self, collector):
        """Reports added from many threads are all kept."""
        threads = [threading.Thread(target=collector.add, args=(_report(f'check_{k}', 0.0),)) for k in range(20)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert len(collector) == 20


class TestSummary:
    def test_summary_columns(self):
        frame = summarize_reports([_report('ccr', 1e-12), _report('norm_law', 1.0)])
        assert list(frame.columns) == SUMMARY_COLUMNS
        assert frame['n_failed'].tolist() == [0, 1]
        assert frame['verdict'].tolist() == ['pass', 'fail']

    def test_empty_summary(self):
        assert summarize_reports([]).empty

    def test_csv(self, tmp_path):
        path = write_summary_csv([_report('ccr', 1e-12)], tmp_path / 'out' / 'summary.csv')
        assert path.read_text(encoding='utf-8').splitlines()[0] == ','.join(SUMMARY_COLUMNS)
