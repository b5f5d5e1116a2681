"""
Workbench Configuration
=======================
Environment-driven defaults plus the validated models of a suite file.

Environment variables:
- LOG_LEVEL: logging level for the CLI (default INFO)
- WORKBENCH_OUTPUT_DIR: where reports are written (default python/data/reports)
- WORKBENCH_DIMENSION_BUDGET: largest truncated Hilbert space allowed (default 4096)
- WORKBENCH_REFERENCE_BUDGET: largest cutoff-refinement reference allowed (default 65536)
- WORKBENCH_SEED: default RNG seed for randomized vector batteries (default 0)
"""

import json
import os
import re
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, Field, ValidationError, ValidationInfo, field_validator, model_validator


class ConfigWorkbench:
    """Global defaults read from the environment."""

    # Get the python directory (parent of config directory)
    PRODUCTION_DIR = Path(__file__).parent.parent

    LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')

    DIMENSION_BUDGET_DEFAULT = 4096
    REFERENCE_BUDGET_DEFAULT = 65536
    SEED_DEFAULT = 0

    @classmethod
    def get_dimension_budget(cls) -> int:
        return int(os.getenv('WORKBENCH_DIMENSION_BUDGET', str(cls.DIMENSION_BUDGET_DEFAULT)))

    @classmethod
    def get_reference_budget(cls) -> int:
        return int(os.getenv('WORKBENCH_REFERENCE_BUDGET', str(cls.REFERENCE_BUDGET_DEFAULT)))

    @classmethod
    def get_seed(cls) -> int:
        return int(os.getenv('WORKBENCH_SEED', str(cls.SEED_DEFAULT)))

    @classmethod
    def get_output_dir(cls) -> Path:
        """Report directory. Priority: WORKBENCH_OUTPUT_DIR env var > python/data/reports."""
        output_dir = os.getenv('WORKBENCH_OUTPUT_DIR', '')
        if output_dir:
            return Path(output_dir)
        return cls.PRODUCTION_DIR / 'data' / 'reports'

    @classmethod
    def get_default_report_path(cls) -> Path:
        return cls.get_output_dir() / 'report.json'

    @classmethod
    def get_default_log_path(cls) -> Path:
        return cls.get_output_dir() / 'run.log'

    @classmethod
    def create_directories(cls):
        """Create the report directory if it does not exist."""
        cls.get_output_dir().mkdir(parents=True, exist_ok=True)

    @classmethod
    def get_info(cls) -> dict[str, Any]:
        """Return the effective configuration."""
        return {
            'log_level': os.getenv('LOG_LEVEL', cls.LOG_LEVEL),
            'output_dir': str(cls.get_output_dir()),
            'dimension_budget': cls.get_dimension_budget(),
            'reference_budget': cls.get_reference_budget(),
            'seed': cls.get_seed(),
        }


# ============================================================
# SUITE FILE MODELS
# ============================================================

RESERVED_NAMES = frozenset({'i', 'res', 'cliff', 'field', 'zeta', 'prime'})
_NAME_RE = re.compile(r'^[A-Za-z_][A-Za-z0-9_]*$')


class ModelSpec(BaseModel):
    """Which test-function space to build."""

    flavor: Literal['canonical_pairs', 'lightray_hermite', 'custom'] = Field(..., description='Model flavor')
    n_pairs: int | None = Field(default=None, ge=1, description='Canonical pairs (canonical_pairs only)')
    N: int | None = Field(default=None, ge=2, description='Dimension of the test-function space')
    tau: list[list[float]] | None = Field(default=None, description='Row-major τ (custom only)')
    S: list[list[float]] | None = Field(default=None, description='Row-major generator S (custom only)')

    @model_validator(mode='after')
    def _check_flavor_fields(self) -> 'ModelSpec':
        if self.flavor == 'canonical_pairs':
            if self.n_pairs is None and self.N is None:
                raise ValueError('canonical_pairs needs n_pairs or N')
            if self.n_pairs is None:
                if self.N % 2:
                    raise ValueError(f'canonical_pairs needs an even N, got {self.N}')
                self.n_pairs = self.N // 2
            self.N = 2 * self.n_pairs
        elif self.flavor == 'lightray_hermite':
            if self.N is None:
                raise ValueError('lightray_hermite needs N')
        elif self.tau is None or self.S is None:
            raise ValueError('custom models need both tau and S')
        elif self.N is None:
            self.N = len(self.tau)
        return self

    def to_dict(self) -> dict[str, Any]:
        return self.model_dump(exclude_none=True)


class RepConfig(BaseModel):
    """Truncation and tolerance settings of the Fock representation."""

    boson_cutoff: int = Field(default=12, ge=4, description='Levels 0..d-1 per boson mode')
    safe_margin: int = Field(default=2, gt=0, description='Occupation headroom of safe vectors')
    solver_tolerance: float = Field(default=1e-10, gt=0, description='Max residual of resolvent solves')
    dimension_budget: int = Field(
        default_factory=ConfigWorkbench.get_dimension_budget, gt=0, description='Largest total dimension'
    )
    reference_budget: int = Field(
        default_factory=ConfigWorkbench.get_reference_budget, gt=0, description='Largest cutoff-refinement reference'
    )
    ccr_tolerance: float = Field(default=1e-6, gt=0, description='Bound of the σ-dependent resolvent relations')
    truncation_guard: bool = Field(default=True, description='Refine the cutoff for σ-dependent checks')

    @field_validator('safe_margin')
    @classmethod
    def _margin_below_half_cutoff(cls, value: int, info: ValidationInfo) -> int:
        cutoff = info.data.get('boson_cutoff')
        if cutoff is not None and not value < cutoff / 2:
            raise ValueError(f'safe_margin must be below boson_cutoff/2 = {cutoff / 2}')
        return value


class CheckSpec(BaseModel):
    id: str = Field(..., description='Registered check id')
    overrides: dict[str, Any] = Field(default_factory=dict, description='Keyword overrides for this check')


class SuiteConfig(BaseModel):
    """A complete suite file (schema version 1)."""

    schema_version: Literal[1] = Field(default=1, alias='schema')
    model: ModelSpec
    rep: RepConfig = Field(default_factory=RepConfig)
    functions: dict[str, list[float]] = Field(default_factory=dict, description='Named test functions')
    checks: list[CheckSpec] = Field(default_factory=list)
    seed: int = Field(default_factory=ConfigWorkbench.get_seed, ge=0, le=2**64 - 1)
    output: str | None = Field(default=None, description='Report path')
    max_workers: int = Field(default=1, ge=1)

    model_config = {'populate_by_name': True}

    @field_validator('functions')
    @classmethod
    def _valid_functions(cls, value: dict[str, list[float]], info: ValidationInfo) -> dict[str, list[float]]:
        model = info.data.get('model')
        for name, coeffs in value.items():
            if not _NAME_RE.match(name) or name in RESERVED_NAMES:
                raise ValueError(f'invalid test-function name {name!r}')
            if model is not None and len(coeffs) != model.N:
                raise ValueError(f'function {name!r} has {len(coeffs)} coefficients, model dimension is {model.N}')
        return value


def _reject_duplicates(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    from core.errors import ConfigError

    seen: dict[str, Any] = {}
    for key, value in pairs:
        if key in seen:
            raise ConfigError(key, 'duplicate key')
        seen[key] = value
    return seen


def suite_config_from_dict(data: dict[str, Any]) -> SuiteConfig:
    """Validate a suite dict; the first validation error becomes a ConfigError naming its field path."""
    from core.errors import ConfigError

    try:
        return SuiteConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        path = '.'.join(str(part) for part in first['loc']) or 'suite'
        raise ConfigError(path, first['msg']) from e


def load_suite_config(path: str | Path) -> SuiteConfig:
    from core.errors import ConfigError

    path = Path(path)
    if not path.exists():
        raise ConfigError('config', f'file not found: {path}')
    try:
        data = json.loads(path.read_text(encoding='utf-8'), object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as e:
        raise ConfigError('config', f'invalid JSON at line {e.lineno}: {e.msg}') from e
    if not isinstance(data, dict):
        raise ConfigError('config', 'top level must be a JSON object')
    return suite_config_from_dict(data)
