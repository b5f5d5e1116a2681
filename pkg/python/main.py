"""
Verification Pipeline
=====================
Runs the default checks on the built-in Hermite light-ray model.
"""

import sys

from cli import run_suite
from config.config import ConfigWorkbench, suite_config_from_dict
from config.logging_config import setup_logging

# ============================================================
# CHECK CONFIGURATION
# ============================================================
# Controls which checks run.
# True = run
# False = skip
# ============================================================

CONFIG_CHECKS = {
    'resolvent_battery': True,
    'norm_law': True,
    'strong_asymptotics': True,
    'generator': True,
    'susy_core': True,
    'susy_relation': True,
    'state_conditions': True,
    'density_net': True,
}

PIPELINE_SUITE = {
    'schema': 1,
    'model': {'flavor': 'lightray_hermite', 'N': 4},
    'rep': {'boson_cutoff': 12, 'safe_margin': 2},
    'functions': {'f1': [0.3, 0.0, 0.1, 0.0], 'f2': [0.0, 0.2, 0.0, 0.1]},
}


def main() -> int:
    """Runs the enabled checks and writes the report to the default output directory."""
    setup_logging(level=ConfigWorkbench.LOG_LEVEL)
    print('=' * 60)
    print('RESOLVENT ALGEBRA SUSY WORKBENCH - VERIFICATION PIPELINE')
    print('=' * 60)

    info = ConfigWorkbench.get_info()
    print('\n[Configuration]')
    print(f'   • Output: {info["output_dir"]}')
    print(f'   • Dimension budget: {info["dimension_budget"]}')
    print(f'   • Reference budget: {info["reference_budget"]}')
    print(f'   • Seed: {info["seed"]}')

    enabled = [check_id for check_id, run in CONFIG_CHECKS.items() if run]
    suite = suite_config_from_dict({**PIPELINE_SUITE, 'checks': [{'id': c} for c in enabled]})
    ConfigWorkbench.create_directories()

    print(f'\n[Checks] {len(enabled)} enabled')
    status, collector, path = run_suite(suite, log=ConfigWorkbench.get_default_log_path())

    print('\n[Verdicts]')
    for report in collector.reports:
        mark = '✓' if report.passed else '✗'
        print(f'   {mark} {report.check_id:<28} max residual {report.residuals.max:.2e}')

    print('\n' + '=' * 60)
    if status == 0:
        print('✅ All checks passed')
    else:
        print('❌ Some checks failed')
    print(f'   Report: {path}')
    print(f'   Run log: {ConfigWorkbench.get_default_log_path()}')
    print('=' * 60)
    return status


if __name__ == '__main__':
    sys.exit(main())
