"""
Core Module - Resolvent Algebra Workbench
=========================================
Test-function spaces, the graded algebra of resolvents, fermion fields and
fields, its truncated Fock representation and the numeric checks built on it.
"""

from .errors import (
    ConfigError,
    DegenerateFormError,
    DimensionBudgetError,
    DomainError,
    ExpressionParseError,
    ModelError,
    WorkbenchError,
)
from .expression_io import (
    expression_from_json,
    expression_to_json,
    parse_expression,
    render_expression,
)
from .fock_rep import (
    Rep,
    build_rep,
    evaluate,
    op_resolvent,
    operator_norm,
    safe_project,
    state_expectation,
    strong_apply,
    vacuum,
)
from .graded_algebra import (
    ExprClass,
    Expression,
    classify,
    cliff,
    field,
    res,
    simplify,
    translate,
    zeta,
)
from .report_collector import ReportCollector, summarize_reports
from .space_model import (
    DarbouxFrame,
    SpaceModel,
    TestFunction,
    build_canonical_pairs,
    build_custom,
    build_lightray_hermite,
    darboux_basis,
    flow,
    prime,
    sigma,
    tau,
)
from .superderivations import (
    conjugate_superderivation,
    derivation_bar,
    mollified_square,
    mollifier,
    superderivation_bar,
    superderivation_core,
)
from .verifier import CheckContext, CheckReport, FDScheme, list_checks, run_check

__all__ = [
    # Errors
    'WorkbenchError',
    'ModelError',
    'DegenerateFormError',
    'DomainError',
    'DimensionBudgetError',
    'ConfigError',
    'ExpressionParseError',
    # Space models
    'TestFunction',
    'SpaceModel',
    'DarbouxFrame',
    'build_canonical_pairs',
    'build_lightray_hermite',
    'build_custom',
    'sigma',
    'tau',
    'prime',
    'flow',
    'darboux_basis',
    # Graded algebra
    'Expression',
    'ExprClass',
    'res',
    'cliff',
    'field',
    'zeta',
    'simplify',
    'classify',
    'translate',
    # Superderivations
    'superderivation_bar',
    'derivation_bar',
    'superderivation_core',
    'conjugate_superderivation',
    'mollifier',
    'mollified_square',
    # Expression I/O
    'parse_expression',
    'render_expression',
    'expression_to_json',
    'expression_from_json',
    # Fock representation
    'Rep',
    'build_rep',
    'evaluate',
    'op_resolvent',
    'operator_norm',
    'strong_apply',
    'vacuum',
    'safe_project',
    'state_expectation',
    # Verifier
    'CheckReport',
    'CheckContext',
    'FDScheme',
    'run_check',
    'list_checks',
    'ReportCollector',
    'summarize_reports',
]
