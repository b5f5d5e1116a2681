"""
Space Model
===========
Finite-dimensional models of the test-function space (X, σ, τ) together with
the one-parameter group T_t = exp(tS) and its generator S.

Two flavors are built in:
- canonical_pairs: n exact canonical pairs, τ = identity, S(u, v) = (−v, u), so T_t is a rotation.
- lightray_hermite: the real Schwartz space on the line truncated to the first N Hermite
  functions, τ = identity and S = −D where D is the derivative matrix.

A third flavor, custom, takes explicit τ and S matrices.

σ is always derived as σ(f, g) := τ(f, −S g), so a single (τ, S) pair fixes all three structures.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any

import numpy as np
import scipy.linalg

from .errors import DegenerateFormError, ModelError

logger = logging.getLogger(__name__)

# Tolerance for the structural checks performed at construction time
STRUCTURE_TOLERANCE = 1e-12

FLAVORS = ('canonical_pairs', 'lightray_hermite', 'custom')


@dataclass(frozen=True)
class TestFunction:
    """Coordinates of a test function in the fixed basis of a SpaceModel."""

    __test__ = False  # not a pytest class

    coeffs: tuple[float, ...]

    @classmethod
    def from_array(cls, values: Any) -> 'TestFunction':
        arr = np.asarray(values, dtype=float).ravel()
        return cls(tuple(float(x) for x in arr))

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=float)

    @property
    def dim(self) -> int:
        return len(self.coeffs)

    def is_zero(self) -> bool:
        return all(c == 0.0 for c in self.coeffs)

    def norm(self) -> float:
        return float(np.linalg.norm(self.array))

    def parallel_factor(self, other: 'TestFunction', tol: float = 1e-12) -> float | None:
        """Return s with other = s·self, or None when the two are not parallel."""
        a, b = self.array, other.array
        aa = float(a @ a)
        if aa == 0.0:
            return None
        s = float(a @ b) / aa
        if s == 0.0 or np.linalg.norm(b - s * a) > tol * max(1.0, np.linalg.norm(b)):
            return None
        return s

    def __add__(self, other: 'TestFunction') -> 'TestFunction':
        return TestFunction.from_array(self.array + _as_array(other, self.dim))

    def __sub__(self, other: 'TestFunction') -> 'TestFunction':
        return TestFunction.from_array(self.array - _as_array(other, self.dim))

    def __neg__(self) -> 'TestFunction':
        return TestFunction.from_array(-self.array)

    def __mul__(self, scalar: float) -> 'TestFunction':
        return TestFunction.from_array(float(scalar) * self.array)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> 'TestFunction':
        return TestFunction.from_array(self.array / float(scalar))


def _as_array(f: Any, dim: int | None = None) -> np.ndarray:
    arr = f.array if isinstance(f, TestFunction) else np.asarray(f, dtype=float).ravel()
    if dim is not None and arr.shape[0] != dim:
        raise ModelError(f'Test function has length {arr.shape[0]}, expected {dim}')
    return arr


@dataclass(frozen=True, eq=False)
class SpaceModel:
    """
    Test-function space with scalar product τ, generator S and symplectic form σ = τ(·, −S·).

    Instances are immutable; equality is identity so they can key caches.
    """

    N: int
    tau_matrix: np.ndarray
    S: np.ndarray
    flavor: str
    omega: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        tau_m = np.array(self.tau_matrix, dtype=float)
        s_m = np.array(self.S, dtype=float)
        # Gram matrix of σ in the model basis: Ω_ij = σ(b_i, b_j) = τ(b_i, −S b_j)
        omega = -tau_m @ s_m
        for arr in (tau_m, s_m, omega):
            arr.setflags(write=False)
        object.__setattr__(self, 'tau_matrix', tau_m)
        object.__setattr__(self, 'S', s_m)
        object.__setattr__(self, 'omega', omega)

    @property
    def n_pairs(self) -> int:
        return self.N // 2

    def basis(self, index: int) -> TestFunction:
        """Basis vector e_index of the model."""
        v = np.zeros(self.N)
        v[index] = 1.0
        return TestFunction.from_array(v)

    def coords(self, f: Any) -> np.ndarray:
        """Coordinates of f as a float array, validated against the model dimension."""
        return _as_array(f, self.N)

    def flow_matrix(self, t: float) -> np.ndarray:
        return _flow_matrix(self, float(t))

    def __repr__(self) -> str:
        return f'SpaceModel(flavor={self.flavor!r}, N={self.N})'


@lru_cache(maxsize=256)
def _flow_matrix(model: SpaceModel, t: float) -> np.ndarray:
    if t == 0.0:
        mat = np.eye(model.N)
    else:
        mat = scipy.linalg.expm(t * model.S)
    mat.setflags(write=False)
    return mat


@dataclass(frozen=True, eq=False)
class DarbouxFrame:
    """
    Basis in which σ takes canonical pair form.

    Columns of `B` are ordered (e_1, f_1, e_2, f_2, ...) with σ(e_j, f_k) = δ_jk and
    σ(e_j, e_k) = σ(f_j, f_k) = 0.
    """

    B: np.ndarray
    n: int
    B_inv: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        b = np.array(self.B, dtype=float)
        b_inv = np.linalg.inv(b)
        b.setflags(write=False)
        b_inv.setflags(write=False)
        object.__setattr__(self, 'B', b)
        object.__setattr__(self, 'B_inv', b_inv)

    def coordinates(self, f: Any) -> tuple[np.ndarray, np.ndarray]:
        """Darboux coordinates (α, β) of f: f = Σ_k α_k e_k + β_k f_k."""
        c = self.B_inv @ _as_array(f, 2 * self.n)
        return c[0::2], c[1::2]

    def residual(self, model: SpaceModel) -> float:
        """max |σ(B b_i, B b_j) − J_ij| over the frame."""
        j = canonical_form(self.n)
        return float(np.max(np.abs(self.B.T @ model.omega @ self.B - j)))


def canonical_form(n_pairs: int) -> np.ndarray:
    """Block-diagonal J with blocks [[0, 1], [−1, 0]]."""
    return np.kron(np.eye(n_pairs), np.array([[0.0, 1.0], [-1.0, 0.0]]))


# ============================================================
# CONSTRUCTION
# ============================================================


def build_canonical_pairs(n_pairs: int) -> SpaceModel:
    """n exact canonical pairs with rotation flow; coordinates ordered (u_1, v_1, u_2, v_2, ...)."""
    if n_pairs < 1:
        raise ModelError(f'n_pairs must be >= 1, got {n_pairs}')
    block = np.array([[0.0, -1.0], [1.0, 0.0]])  # S(u, v) = (−v, u)
    s_m = np.kron(np.eye(n_pairs), block)
    model = SpaceModel(N=2 * n_pairs, tau_matrix=np.eye(2 * n_pairs), S=s_m, flavor='canonical_pairs')
    logger.debug(f'Built canonical model with {n_pairs} pair(s)')
    return model


def hermite_derivative_matrix(N: int) -> np.ndarray:
    """Matrix of d/dx on the first N Hermite functions: h_n' = √(n/2) h_{n−1} − √((n+1)/2) h_{n+1}."""
    d = np.zeros((N, N))
    for n in range(N - 1):
        w = np.sqrt((n + 1) / 2.0)
        d[n, n + 1] = w
        d[n + 1, n] = -w
    return d


def build_lightray_hermite(N: int) -> SpaceModel:
    """Hermite truncation of the light-ray model, σ(f, g) = ∫ f g′."""
    if N < 2:
        raise ModelError(f'Hermite truncation needs N >= 2, got {N}')
    if N % 2 != 0:
        # An odd antisymmetric matrix is singular
        raise DegenerateFormError(
            f'Hermite truncation with odd N={N} gives a degenerate σ; use an even N', subspace=list(range(N))
        )
    d = hermite_derivative_matrix(N)
    model = SpaceModel(N=N, tau_matrix=np.eye(N), S=-d, flavor='lightray_hermite')
    logger.debug(f'Built Hermite light-ray model with N={N}')
    return model


def build_custom(tau: Any, S: Any) -> SpaceModel:
    """Model from explicit τ and S; validates symmetry, positivity, τ-antisymmetry and nondegeneracy."""
    tau_m = np.asarray(tau, dtype=float)
    s_m = np.asarray(S, dtype=float)
    if tau_m.ndim != 2 or tau_m.shape[0] != tau_m.shape[1]:
        raise ModelError(f'tau must be a square matrix, got shape {tau_m.shape}')
    if s_m.shape != tau_m.shape:
        raise ModelError(f'S has shape {s_m.shape}, expected {tau_m.shape}')
    n = tau_m.shape[0]
    if np.max(np.abs(tau_m - tau_m.T)) > STRUCTURE_TOLERANCE:
        raise ModelError('tau is not symmetric')
    if np.min(np.linalg.eigvalsh(tau_m)) <= 0.0:
        raise ModelError('tau is not positive definite')
    if np.max(np.abs(s_m.T @ tau_m + tau_m @ s_m)) > STRUCTURE_TOLERANCE * max(1.0, np.max(np.abs(s_m))):
        raise ModelError('S is not tau-antisymmetric: tau(Sf, g) != -tau(f, Sg)')
    if n % 2 != 0:
        raise DegenerateFormError(f'Odd dimension N={n} always gives a degenerate σ', subspace=list(range(n)))
    singular = scipy.linalg.svdvals(tau_m @ s_m)
    if singular[-1] <= STRUCTURE_TOLERANCE * max(1.0, singular[0]):
        raise DegenerateFormError('σ is degenerate (S is not invertible)', subspace=list(range(n)))
    return SpaceModel(N=n, tau_matrix=tau_m, S=s_m, flavor='custom')


# ============================================================
# FORMS AND FLOW
# ============================================================


def sigma(model: SpaceModel, f: Any, g: Any) -> float:
    """σ(f, g) = τ(f, −S g)."""
    return float(model.coords(f) @ model.omega @ model.coords(g))


def tau(model: SpaceModel, f: Any, g: Any) -> float:
    """τ(f, g)."""
    return float(model.coords(f) @ model.tau_matrix @ model.coords(g))


def prime(model: SpaceModel, f: Any) -> TestFunction:
    """f′ := −S f."""
    return TestFunction.from_array(-model.S @ model.coords(f))


def apply_generator(model: SpaceModel, f: Any) -> TestFunction:
    """S f."""
    return TestFunction.from_array(model.S @ model.coords(f))


def flow(model: SpaceModel, t: float, f: Any) -> TestFunction:
    """T_t f = exp(tS) f."""
    return TestFunction.from_array(model.flow_matrix(t) @ model.coords(f))


def symplectic_residual(model: SpaceModel, T: Any) -> float:
    """max |σ(T b_i, T b_j) − σ(b_i, b_j)| over basis pairs."""
    t_m = np.asarray(T, dtype=float)
    if t_m.shape != (model.N, model.N):
        raise ModelError(f'Map has shape {t_m.shape}, expected {(model.N, model.N)}')
    return float(np.max(np.abs(t_m.T @ model.omega @ t_m - model.omega)))


def is_symplectic(model: SpaceModel, T: Any, tol: float = STRUCTURE_TOLERANCE) -> bool:
    return symplectic_residual(model, T) <= tol * max(1.0, float(np.max(np.abs(model.omega))))


def model_residuals(model: SpaceModel, t: float = 0.7) -> dict[str, float]:
    """Structural residuals of the model invariants (all expected at round-off level)."""
    ts = model.tau_matrix @ model.S
    flow_m = model.flow_matrix(t)
    return {
        'tau_antisymmetry': float(np.max(np.abs(ts + ts.T))),
        'sigma_antisymmetry': float(np.max(np.abs(model.omega + model.omega.T))),
        'flow_orthogonality': float(np.max(np.abs(flow_m.T @ model.tau_matrix @ flow_m - model.tau_matrix))),
        'flow_symplecticity': symplectic_residual(model, flow_m),
    }


def ttdiff_errors(model: SpaceModel, f: Any, g: Any, ts: tuple[float, ...] = (1e-2, 1e-3, 1e-4)) -> dict[str, Any]:
    """
    Difference-quotient errors |σ((T_t f − f)/t, g) − σ(Sf, g)| and their observed order in t.

    The order is None when every error sits at round-off level.
    """
    f_arr = model.coords(f)
    target = sigma(model, apply_generator(model, f_arr), g)
    errors = []
    for t in ts:
        quotient = (model.flow_matrix(t) @ f_arr - f_arr) / t
        errors.append(abs(sigma(model, quotient, g) - target))
    errors_arr = np.array(errors)
    order = None
    if np.all(errors_arr > 1e-13):
        order = float(np.polyfit(np.log(ts), np.log(errors_arr), 1)[0])
    return {'ts': list(ts), 'errors': errors, 'order': order}


# ============================================================
# DARBOUX FRAME
# ============================================================


def darboux_basis(model: SpaceModel, tol: float = 1e-10) -> DarbouxFrame:
    """
    Symplectic Gram–Schmidt on the model basis.

    Each step takes the first remaining vector e, pairs it with the remaining vector w of
    largest |σ(e, w)|, scales f = w / σ(e, w) and removes the (e, f) components from the rest:
    v ← v + σ(f, v) e − σ(e, v) f.
    """
    omega = model.omega
    remaining = [np.eye(model.N)[:, i] for i in range(model.N)]
    labels = list(range(model.N))
    columns = []
    scale = max(1.0, float(np.max(np.abs(omega))))
    while remaining:
        e = remaining.pop(0)
        e_label = labels.pop(0)
        if not remaining:
            raise DegenerateFormError(
                f'σ is degenerate: basis vector {e_label} has no symplectic partner', subspace=[e_label]
            )
        pairings = np.array([e @ omega @ w for w in remaining])
        k = int(np.argmax(np.abs(pairings)))
        if abs(pairings[k]) <= tol * scale:
            raise DegenerateFormError(
                f'σ is degenerate on the span of basis vectors {[e_label, *labels]}',
                subspace=[e_label, *labels],
            )
        w = remaining.pop(k)
        labels.pop(k)
        f_vec = w / pairings[k]
        columns.extend([e, f_vec])
        remaining = [v + (f_vec @ omega @ v) * e - (e @ omega @ v) * f_vec for v in remaining]
    frame = DarbouxFrame(B=np.column_stack(columns), n=model.N // 2)
    logger.debug(f'Darboux frame residual {frame.residual(model):.2e} for {model}')
    return frame


# ============================================================
# SERIALIZATION
# ============================================================


def model_to_dict(model: SpaceModel) -> dict[str, Any]:
    """JSON description: {flavor, N} plus row-major tau and S for custom models."""
    data: dict[str, Any] = {'flavor': model.flavor, 'N': model.N}
    if model.flavor == 'canonical_pairs':
        data['n_pairs'] = model.n_pairs
    if model.flavor == 'custom':
        data['tau'] = model.tau_matrix.tolist()
        data['S'] = model.S.tolist()
    return data


def model_from_dict(data: dict[str, Any]) -> SpaceModel:
    flavor = data.get('flavor')
    if flavor == 'canonical_pairs':
        n_pairs = data.get('n_pairs')
        if n_pairs is None:
            n_pairs = int(data['N']) // 2
        return build_canonical_pairs(int(n_pairs))
    if flavor == 'lightray_hermite':
        return build_lightray_hermite(int(data['N']))
    if flavor == 'custom':
        return build_custom(data['tau'], data['S'])
    raise ModelError(f"Unknown model flavor: {flavor!r}. Valid flavors: {', '.join(FLAVORS)}")
