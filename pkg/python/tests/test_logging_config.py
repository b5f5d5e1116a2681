"""Tests for the check-id log filter and the per-run log file."""

import logging

from config.logging_config import CORE_LOGGER, CheckIdFilter, check_scope, run_log


def _record() -> logging.LogRecord:
    return logging.LogRecord('core.verifier', logging.INFO, __file__, 1, 'message', None, None)


class TestCheckScope:
    def test_outside_a_check(self):
        record = _record()
        assert CheckIdFilter().filter(record)
        assert record.check_id == '-'

    def test_nested_scopes_restore(self):
        with check_scope('ccr'):
            with check_scope('generator'):
                inner = _record()
                CheckIdFilter().filter(inner)
            outer = _record()
            CheckIdFilter().filter(outer)
        assert inner.check_id == 'generator'
        assert outer.check_id == 'ccr'


class TestRunLog:
    def test_none_is_a_no_op(self):
        core = logging.getLogger(CORE_LOGGER)
        handlers = list(core.handlers)
        with run_log(None) as path:
            assert path is None
        assert core.handlers == handlers

    def test_captures_debug_and_restores(self, tmp_path):
        core = logging.getLogger(CORE_LOGGER)
        previous = core.level
        log = tmp_path / 'nested' / 'run.log'
        with run_log(log) as path, check_scope('susy_core'):
            assert core.level == logging.DEBUG
            logging.getLogger('core.verifier').debug('susy_core[λ=1.0]: residual 1.0e-09')
        assert path == log
        assert core.level == previous
        assert all(getattr(h, 'baseFilename', None) != str(log) for h in core.handlers)
        text = log.read_text(encoding='utf-8')
        assert '[DEBUG] core.verifier [susy_core]: susy_core[λ=1.0]: residual 1.0e-09' in text

    def test_rewrites_file_per_run(self, tmp_path):
        log = tmp_path / 'run.log'
        for message in ('first', 'second'):
            with run_log(log):
                logging.getLogger('core.fock_rep').info(message)
        text = log.read_text(encoding='utf-8')
        assert 'second' in text
        assert 'first' not in text
