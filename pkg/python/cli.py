"""
Workbench Command Line
======================
Runs verification suites and evaluates single expressions.

    python cli.py --config suite.json [--check ID ...] [--seed N] [--out report.json]
                  [--summary table.csv] [--log run.log]
    python cli.py --config suite.json --expr "zeta(f1)" --action classify
    python cli.py --list-checks

Every invocation prints one JSON object on stdout; logs go to stderr.
Exit status: 0 all verdicts pass, 1 some verdict failed, 2 error.
"""

import argparse
import json
import logging
import os
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

# Add this directory to the path for imports
sys.path.insert(0, str(Path(__file__).parent))

from tqdm import tqdm

from config.config import CheckSpec, SuiteConfig, load_suite_config, suite_config_from_dict
from config.logging_config import run_log, setup_logging
from core.errors import ConfigError, DimensionBudgetError
from core.expression_io import bind_functions, expression_to_dict, parse_expression, render_expression
from core.fock_rep import Rep, build_rep, state_expectation
from core.graded_algebra import classify, simplify
from core.report_collector import ReportCollector, write_summary_csv
from core.space_model import SpaceModel, TestFunction, model_from_dict
from core.superderivations import derivation_bar, superderivation_bar
from core.verifier import CHECKS, CheckContext, CheckReport, list_checks, run_check

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_ERROR = 2

ACTIONS = ('classify', 'simplify', 'dbar_s', 'dbar_h', 'expect')

# Used when no --config is given: one canonical pair, resolvent battery only
DEFAULT_SUITE: dict[str, Any] = {
    'schema': 1,
    'model': {'flavor': 'canonical_pairs', 'n_pairs': 1},
    'rep': {'boson_cutoff': 16},
    'checks': [{'id': 'resolvent_battery'}],
}


# ============================================================
# SUITE PLUMBING
# ============================================================


def build_model(config: SuiteConfig) -> SpaceModel:
    return model_from_dict(config.model.to_dict())


def bind_names(model: SpaceModel, config: SuiteConfig) -> dict[str, TestFunction]:
    """Named test functions of the suite; f1..fN bound to the basis when none are given."""
    if config.functions:
        return bind_functions(model, config.functions)
    return {f'f{i + 1}': model.basis(i) for i in range(model.N)}


def validate_checks(checks: list[CheckSpec]):
    for k, spec in enumerate(checks):
        if spec.id not in CHECKS:
            raise ConfigError(f'checks.{k}.id', f'unknown check {spec.id!r}; available: {", ".join(CHECKS)}')


def select_checks(config: SuiteConfig, check_ids: list[str] | None) -> list[CheckSpec]:
    """The suite's checks, or the requested ids with any overrides the suite defines for them."""
    if not check_ids:
        return list(config.checks)
    configured = {spec.id: spec for spec in config.checks}
    return [configured.get(check_id, CheckSpec(id=check_id)) for check_id in check_ids]


def build_context(config: SuiteConfig, seed: int | None = None) -> CheckContext:
    model = build_model(config)
    try:
        rep: Rep = build_rep(model, config.rep)
    except DimensionBudgetError as e:
        logger.error(f'Cannot build the representation of {model} at cutoff {config.rep.boson_cutoff}: {e}')
        raise
    return CheckContext(rep=rep, names=bind_names(model, config), seed=config.seed if seed is None else seed)


def run_suite(
    config: SuiteConfig,
    check_ids: list[str] | None = None,
    seed: int | None = None,
    out: str | Path | None = None,
    summary: str | Path | None = None,
    progress: bool = True,
    log: str | Path | None = None,
) -> tuple[int, ReportCollector, Path]:
    """
    Build model and representation, run the selected checks and write the report array.

    Returns (exit status, collector, report path). Checks run on a thread pool when the
    suite sets max_workers > 1; reports are added in suite order either way.
    With `log` set, every record of the run, per-case residuals included, goes to that file.
    """
    checks = select_checks(config, check_ids)
    validate_checks(checks)
    ctx = build_context(config, seed)
    collector = ReportCollector(out or config.output)

    def execute(spec: CheckSpec) -> list[CheckReport]:
        return run_check(spec.id, ctx, spec.overrides)

    with run_log(log):
        logger.info(f'Running {len(checks)} checks on {ctx.rep} (seed {ctx.seed})')
        if config.max_workers > 1 and len(checks) > 1:
            with ThreadPoolExecutor(max_workers=config.max_workers) as pool:
                futures = [pool.submit(execute, spec) for spec in checks]
                for future in tqdm(futures, desc='   Progress', disable=not progress):
                    collector.extend(future.result())
        else:
            for spec in tqdm(checks, desc='   Progress', disable=not progress):
                collector.extend(execute(spec))

    path = collector.write()
    if summary:
        write_summary_csv(collector.reports, summary)
    return collector.exit_status(), collector, path


def eval_expr(config: SuiteConfig, expr_text: str, action: str) -> dict[str, Any]:
    """Apply one action to a parsed expression; the result is JSON-ready."""
    if action not in ACTIONS:
        raise ConfigError('action', f'unknown action {action!r}; expected one of {", ".join(ACTIONS)}')
    model = build_model(config)
    names = bind_names(model, config)
    expr = parse_expression(expr_text, model, names)
    if action == 'classify':
        return {'class': classify(expr).value}
    if action == 'expect':
        value = state_expectation(build_rep(model, config.rep), expr)
        return {'real': value.real, 'imag': value.imag}
    transforms = {'simplify': simplify, 'dbar_s': superderivation_bar, 'dbar_h': derivation_bar}
    result = simplify(transforms[action](expr))
    return {'text': render_expression(result, names), 'expression': expression_to_dict(result)}


# ============================================================
# COMMAND API
# ============================================================


class WorkbenchAPI:
    """JSON command interface over the suite runner."""

    def execute(self, command: dict[str, Any]) -> dict[str, Any]:
        """Execute a command and return a JSON response."""
        try:
            action = command.get('action')

            handlers = {
                'run_suite': self._run_suite,
                'eval_expr': self._eval_expr,
                'list_checks': self._list_checks,
                'ping': self._ping,
            }

            handler = handlers.get(action)
            if not handler:
                return {'success': False, 'error': f'Unknown action: {action}'}

            return handler(command)

        except Exception as e:
            logger.error(f'{command.get("action")} failed: {e}')
            return {'success': False, 'error': str(e), 'traceback': traceback.format_exc()}

    def _config(self, command: dict) -> SuiteConfig:
        if command.get('config_path'):
            return load_suite_config(command['config_path'])
        return suite_config_from_dict(command.get('config') or DEFAULT_SUITE)

    def _ping(self, command: dict) -> dict:
        """Health check endpoint."""
        return {'success': True, 'message': 'pong'}

    def _list_checks(self, command: dict) -> dict:
        return {'success': True, 'checks': list_checks()}

    def _run_suite(self, command: dict) -> dict:
        config = self._config(command)
        status, collector, path = run_suite(
            config,
            check_ids=command.get('checks'),
            seed=command.get('seed'),
            out=command.get('out'),
            summary=command.get('summary'),
            progress=command.get('progress', True),
            log=command.get('log'),
        )
        return {
            'success': True,
            'exit_status': status,
            'report': str(path),
            'session': collector.session_id,
            'verdicts': [{'check_id': r.check_id, 'verdict': r.verdict} for r in collector.reports],
        }

    def _eval_expr(self, command: dict) -> dict:
        config = self._config(command)
        result = eval_expr(config, command['expr'], command.get('expr_action', 'simplify'))
        return {'success': True, **result}


# ============================================================
# ENTRY POINT
# ============================================================


def parse_args(argv: list[str] | None = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description='Resolvent algebra SUSY workbench')
    parser.add_argument('--config', help='Suite configuration (JSON)')
    parser.add_argument('--check', nargs='+', metavar='ID', help='Run only these checks')
    parser.add_argument('--seed', type=int, help='RNG seed for the vector batteries')
    parser.add_argument('--out', help='Report path (JSON array)')
    parser.add_argument('--summary', help='Also write a CSV summary table')
    parser.add_argument('--log', help='Write a DEBUG log of the run, per-case residuals included')
    parser.add_argument('--expr', help='Expression to evaluate instead of running a suite')
    parser.add_argument('--action', choices=ACTIONS, default='simplify', help='What to do with --expr')
    parser.add_argument('--list-checks', action='store_true', help='Print the check registry')
    parser.add_argument('--no-progress', action='store_true', help='Disable the progress bar')
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    """Main entry point; returns the exit status."""
    setup_logging(level=os.getenv('LOG_LEVEL', 'INFO'))
    args = parse_args(argv)
    api = WorkbenchAPI()

    command: dict[str, Any] = {'config_path': args.config}
    if args.list_checks:
        command['action'] = 'list_checks'
    elif args.expr is not None:
        command.update(action='eval_expr', expr=args.expr, expr_action=args.action)
    else:
        command.update(
            action='run_suite',
            checks=args.check,
            seed=args.seed,
            out=args.out,
            summary=args.summary,
            log=args.log,
            progress=not args.no_progress,
        )

    result = api.execute(command)
    print(json.dumps(result, indent=2, ensure_ascii=False), flush=True)
    if not result.get('success'):
        return EXIT_ERROR
    return result.get('exit_status', EXIT_OK)


if __name__ == '__main__':
    sys.exit(main())
