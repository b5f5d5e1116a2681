"""Tests for the command line and the JSON command API."""

import json

import pytest

from cli import WorkbenchAPI, eval_expr, main, run_suite
from config.config import suite_config_from_dict


def _run(capsys, argv):
    status = main(argv)
    return status, json.loads(capsys.readouterr().out)


def _write(tmp_path, suite) -> str:
    path = tmp_path / 'suite.json'
    path.write_text(json.dumps(suite), encoding='utf-8')
    return str(path)


CANONICAL = {'schema': 1, 'model': {'flavor': 'canonical_pairs', 'n_pairs': 1}, 'rep': {'boson_cutoff': 16}}


class TestListAndExpressions:
    def test_list_checks(self, capsys):
        status, out = _run(capsys, ['--list-checks'])
        assert status == 0
        assert out['success'] is True
        assert 'resolvent_battery' in [c['id'] for c in out['checks']]

    def test_dbar_s_of_cliff(self, capsys):
        status, out = _run(capsys, ['--expr', 'cliff(f1)', '--action', 'dbar_s'])
        assert status == 0
        assert out['text'] == 'field(f1)'
        assert out['expression']['class'] == 'EOnly'

    def test_classify(self, capsys):
        status, out = _run(capsys, ['--expr', 'zeta(f1)', '--action', 'classify'])
        assert status == 0
        assert out['class'] == 'CoreA'

    def test_expect_scalar(self, capsys):
        _, out = _run(capsys, ['--expr', '1', '--action', 'expect'])
        assert out['real'] == pytest.approx(1.0)
        assert out['imag'] == pytest.approx(0.0)

    def test_parse_error_exits_2(self, capsys):
        status, out = _run(capsys, ['--expr', 'cliff(f1', '--action', 'simplify'])
        assert status == 2
        assert out['success'] is False
        assert 'position' in out['error']


class TestSuites:
    def test_default_suite(self, capsys, tmp_path):
        report_path = tmp_path / 'report.json'
        status, out = _run(capsys, ['--out', str(report_path), '--no-progress'])
        assert status == 0
        assert out['exit_status'] == 0
        [report] = json.loads(report_path.read_text(encoding='utf-8'))
        assert report['check_id'] == 'resolvent_battery'
        assert report['verdict'] == 'pass'
        assert len(report['residuals']['per_case']) >= 7

    def test_summary_csv(self, capsys, tmp_path):
        config = _write(tmp_path, {**CANONICAL, 'checks': [{'id': 'norm_law'}, {'id': 'ccr'}]})
        summary = tmp_path / 'summary.csv'
        status, _ = _run(capsys, ['--config', config, '--summary', str(summary), '--no-progress'])
        assert status == 0
        lines = summary.read_text(encoding='utf-8').splitlines()
        assert lines[0].startswith('check_id,verdict')
        assert len(lines) == 3

    def test_check_selection(self, capsys, tmp_path):
        config = _write(tmp_path, {**CANONICAL, 'checks': [{'id': 'norm_law'}]})
        status, out = _run(capsys, ['--config', config, '--check', 'ccr', '--no-progress'])
        assert status == 0
        assert [v['check_id'] for v in out['verdicts']] == ['ccr']

    def test_unknown_flavor(self, capsys, tmp_path):
        config = _write(tmp_path, {'schema': 1, 'model': {'flavor': 'weyl', 'N': 2}})
        status, out = _run(capsys, ['--config', config])
        assert status == 2
        assert out['error'].startswith('model.flavor')

    def test_unknown_check(self, capsys, tmp_path):
        config = _write(tmp_path, {**CANONICAL, 'checks': [{'id': 'no_such_check'}]})
        status, out = _run(capsys, ['--config', config, '--no-progress'])
        assert status == 2
        assert out['error'].startswith('checks.0.id')

    def test_dimension_budget(self, capsys, tmp_path):
        suite = {**CANONICAL, 'rep': {'boson_cutoff': 64, 'dimension_budget': 100}, 'checks': [{'id': 'ccr'}]}
        status, out = _run(capsys, ['--config', _write(tmp_path, suite), '--no-progress'])
        assert status == 2
        assert 'exceeds the budget' in out['error']

    def test_same_seed_same_residuals(self, tmp_path):
        suite = suite_config_from_dict({**CANONICAL, 'checks': [{'id': 'ccr'}, {'id': 'susy_relation'}]})
        _, first, _ = run_suite(suite, seed=7, out=tmp_path / 'a.json', progress=False)
        _, second, _ = run_suite(suite, seed=7, out=tmp_path / 'b.json', progress=False)
        residuals = [[c.residual for c in r.residuals.per_case] for r in first.reports]
        assert residuals == [[c.residual for c in r.residuals.per_case] for r in second.reports]

    def test_parallel_workers_keep_suite_order(self, tmp_path):
        checks = [{'id': 'norm_law'}, {'id': 'ccr'}, {'id': 'fermion_boson_commutativity'}]
        suite = suite_config_from_dict({**CANONICAL, 'checks': checks, 'max_workers': 3})
        status, collector, path = run_suite(suite, out=tmp_path / 'r.json', progress=False)
        assert status == 0
        assert [r.check_id for r in collector.reports] == [c['id'] for c in checks]
        assert path.exists()

    def test_run_log_tags_records_with_check_ids(self, tmp_path):
        suite = suite_config_from_dict({**CANONICAL, 'checks': [{'id': 'norm_law'}, {'id': 'ccr'}]})
        log = tmp_path / 'logs' / 'run.log'
        run_suite(suite, out=tmp_path / 'r.json', progress=False, log=log)
        text = log.read_text(encoding='utf-8')
        assert '[norm_law]: Running check norm_law' in text
        assert '[ccr]: Running check ccr' in text
        assert '[DEBUG]' in text
        assert 'residual' in text

    def test_cli_log_flag(self, capsys, tmp_path):
        log = tmp_path / 'run.log'
        status, _ = _run(capsys, ['--out', str(tmp_path / 'r.json'), '--log', str(log), '--no-progress'])
        assert status == 0
        assert '[resolvent_battery]' in log.read_text(encoding='utf-8')


class TestWorkbenchAPI:
    def test_unknown_action(self):
        result = WorkbenchAPI().execute({'action': 'explode'})
        assert result['success'] is False
        assert 'Unknown action' in result['error']

    def test_ping(self):
        assert WorkbenchAPI().execute({'action': 'ping'}) == {'success': True, 'message': 'pong'}

    def test_errors_carry_traceback(self):
        result = WorkbenchAPI().execute({'action': 'eval_expr', 'expr': 'foo(f1)'})
        assert result['success'] is False
        assert 'traceback' in result

    def test_eval_expr_unknown_action(self):
        suite = suite_config_from_dict(CANONICAL)
        with pytest.raises(Exception, match='action'):
            eval_expr(suite, 'cliff(f1)', 'integrate')
