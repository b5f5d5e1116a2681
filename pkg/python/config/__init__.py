"""
Configuration Module
====================
Environment defaults, suite-file models and logging setup.
"""

from .config import ConfigWorkbench, ModelSpec, RepConfig, SuiteConfig, load_suite_config, suite_config_from_dict
from .logging_config import check_scope, run_log, setup_logging

__all__ = [
    'ConfigWorkbench',
    'ModelSpec',
    'RepConfig',
    'SuiteConfig',
    'check_scope',
    'load_suite_config',
    'run_log',
    'setup_logging',
    'suite_config_from_dict',
]
