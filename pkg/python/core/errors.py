"""
Workbench Errors
================
Exception hierarchy shared by the space models, the symbolic engine,
the Fock representation and the verifier.
"""


class WorkbenchError(Exception):
    """Base error for every workbench operation."""

    pass


class ModelError(WorkbenchError):
    """Invalid test-function space (τ, S) or mismatched dimensions."""

    pass


class DegenerateFormError(ModelError):
    """The symplectic form σ is degenerate on some subspace."""

    def __init__(self, message: str, subspace: list[int] | None = None):
        super().__init__(message)
        self.subspace = subspace or []


class DomainError(WorkbenchError):
    """An operation was applied outside of its domain (e.g. δs on a non-core element)."""

    pass


class DimensionBudgetError(WorkbenchError):
    """The truncated Hilbert space is larger than the configured budget."""

    def __init__(self, dimension: int, budget: int):
        super().__init__(
            f'Truncated Hilbert space dimension {dimension} exceeds the budget {budget}. '
            'Lower boson_cutoff or raise dimension_budget.'
        )
        self.dimension = dimension
        self.budget = budget


class ConfigError(WorkbenchError):
    """Invalid suite configuration; `field` names the offending entry."""

    def __init__(self, field: str, message: str):
        super().__init__(f'{field}: {message}')
        self.field = field


class ExpressionParseError(WorkbenchError):
    """Expression text could not be parsed; `position` is the 0-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f'{message} (at position {position})')
        self.position = position
