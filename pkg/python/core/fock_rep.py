"""
Fock Representation
===================
A regular representation π of the extended algebra on a truncated
fermion ⊗ boson Fock space.

Fermions: N Majorana generators from a Jordan–Wigner construction on N/2 qubits,
scaled so that {C_a, C_b} = δ_ab, and c(f) = Σ_a (Lᵀf)_a C_a with τ = L Lᵀ.
Bosons: one truncated oscillator per Darboux pair with q = (a + a†)/√2 and
p = −i(a − a†)/√2, and j(f) = Σ_k α_k q_k + β_k p_k with (α, β) the Darboux
coordinates of f. Boson operators are sparse; resolvents are applied through
sparse LU factors, so reference representations at large cutoffs stay cheap.

Every atom is a pure fermion or a pure boson operator, so a word factorizes as
(product of fermion parts) ⊗ (product of boson parts). Vectors are handled as
(fermion_dim, boson_dim) arrays.
"""

import logging
import threading
from collections import OrderedDict
from pathlib import Path
from typing import Any

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from config.config import RepConfig

from .errors import DimensionBudgetError, DomainError, ModelError
from .graded_algebra import Atom, AtomKind, Expression, adjoint
from .space_model import DarbouxFrame, SpaceModel, TestFunction, darboux_basis

logger = logging.getLogger(__name__)

# Bounded caches for per-argument boson matrices and LU factors
CACHE_SIZE = 512
# LU fill of the shifted fields grows like boson_dim^1.5; this caps the cached fill
LU_FILL_BUDGET = 2**23

_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def _kron_all(factors: list[np.ndarray]) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def _sparse_kron_all(factors: list[scipy.sparse.csr_matrix]) -> scipy.sparse.csr_matrix:
    out = scipy.sparse.identity(1, dtype=complex, format='csr')
    for f in factors:
        out = scipy.sparse.kron(out, f, format='csr')
    return out


def majorana_generators(n_modes: int) -> list[np.ndarray]:
    """2·n_modes Jordan–Wigner Majoranas scaled to {C_a, C_b} = δ_ab."""
    eye = np.eye(2, dtype=complex)
    gens = []
    for k in range(n_modes):
        string = [_PAULI_Z] * k
        pad = [eye] * (n_modes - k - 1)
        for pauli in (_PAULI_X, _PAULI_Y):
            gens.append(_kron_all(string + [pauli] + pad) / np.sqrt(2.0))
    return gens


def ladder_operators(cutoff: int) -> tuple[scipy.sparse.csr_matrix, scipy.sparse.csr_matrix]:
    """Truncated q = (a + a†)/√2 and p = −i(a − a†)/√2 as sparse matrices; [q, p] = i(I − d·P_top)."""
    a = scipy.sparse.diags(np.sqrt(np.arange(1, cutoff)), offsets=1, shape=(cutoff, cutoff), dtype=complex)
    a = a.tocsr()
    q = (a + a.conj().T) / np.sqrt(2.0)
    p = -1j * (a - a.conj().T) / np.sqrt(2.0)
    return q.tocsr(), p.tocsr()


class Rep:
    """
    Truncated regular representation of one SpaceModel.

    Args:
        model: The test-function space.
        config: Truncation and tolerance settings.
        frame: Darboux frame; computed from the model when omitted.
    """

    def __init__(self, model: SpaceModel, config: RepConfig, frame: DarbouxFrame | None = None):
        self.model = model
        self.config = config
        self.frame = frame if frame is not None else darboux_basis(model)
        self.cutoff = config.boson_cutoff
        self.n_modes = model.N // 2
        self.n_majorana = model.N
        self.fermion_dim = 2**self.n_modes
        self.boson_dim = self.cutoff**self.n_modes
        self.dim = self.fermion_dim * self.boson_dim

        self._majoranas = majorana_generators(self.n_modes)
        self._tau_factor = scipy.linalg.cholesky(model.tau_matrix, lower=True)

        q, p = ladder_operators(self.cutoff)
        eye = scipy.sparse.identity(self.cutoff, dtype=complex, format='csr')
        self._q_ops = []
        self._p_ops = []
        for k in range(self.n_modes):
            left = [eye] * k
            right = [eye] * (self.n_modes - k - 1)
            self._q_ops.append(_sparse_kron_all(left + [q] + right))
            self._p_ops.append(_sparse_kron_all(left + [p] + right))
        self._boson_eye = scipy.sparse.identity(self.boson_dim, dtype=complex, format='csc')

        occupations = np.array(np.unravel_index(np.arange(self.boson_dim), (self.cutoff,) * self.n_modes)).T
        self._max_occupation = occupations.max(axis=1) if self.n_modes else np.zeros(1, dtype=int)

        self._lock = threading.Lock()
        self._lu_cache_size = max(2, min(CACHE_SIZE, int(LU_FILL_BUDGET / self.boson_dim**1.5)))
        self._field_cache: OrderedDict[TestFunction, scipy.sparse.csr_matrix] = OrderedDict()
        self._lu_cache: OrderedDict[tuple[float, TestFunction], scipy.sparse.linalg.SuperLU] = OrderedDict()
        self._inverse_cache: OrderedDict[tuple[float, TestFunction], np.ndarray] = OrderedDict()
        self._doubled: Rep | None = None
        self._doubled_built = False

    def __repr__(self) -> str:
        return f'Rep({self.model}, d={self.cutoff}, dim={self.dim})'

    # ---- caches ------------------------------------------------------------

    def _cache_get(self, cache: OrderedDict, key):
        with self._lock:
            value = cache.get(key)
            if value is not None:
                cache.move_to_end(key)
            return value

    def _cache_put(self, cache: OrderedDict, key, value, size: int = CACHE_SIZE):
        with self._lock:
            cache[key] = value
            while len(cache) > size:
                cache.popitem(last=False)

    # ---- fermion factor ------------------------------------------------------

    def fermion_cliff(self, f: Any) -> np.ndarray:
        """c(f) on the fermion factor."""
        weights = self._tau_factor.T @ self.model.coords(f)
        out = np.zeros((self.fermion_dim, self.fermion_dim), dtype=complex)
        for w, gen in zip(weights, self._majoranas, strict=True):
            if w != 0.0:
                out += w * gen
        return out

    # ---- boson factor --------------------------------------------------------

    def boson_field(self, f: Any) -> scipy.sparse.csr_matrix:
        """j(f) on the boson factor, as a sparse matrix."""
        key = TestFunction.from_array(self.model.coords(f))
        cached = self._cache_get(self._field_cache, key)
        if cached is not None:
            return cached
        alpha, beta = self.frame.coordinates(key)
        out = scipy.sparse.csr_matrix((self.boson_dim, self.boson_dim), dtype=complex)
        for k in range(self.n_modes):
            if alpha[k] != 0.0:
                out = out + alpha[k] * self._q_ops[k]
            if beta[k] != 0.0:
                out = out + beta[k] * self._p_ops[k]
        out = out.tocsr()
        self._cache_put(self._field_cache, key, out)
        return out

    def _lu(self, lam: float, f: TestFunction) -> scipy.sparse.linalg.SuperLU:
        key = (float(lam), f)
        cached = self._cache_get(self._lu_cache, key)
        if cached is not None:
            return cached
        shifted = (1j * lam * self._boson_eye - self.boson_field(f)).tocsc()
        lu = scipy.sparse.linalg.splu(shifted)
        self._cache_put(self._lu_cache, key, lu, self._lu_cache_size)
        return lu

    def boson_resolvent(self, lam: float, f: Any) -> np.ndarray:
        """R(λ, f) = (iλ − j(f))⁻¹ on the boson factor, as a dense matrix."""
        if lam == 0:
            raise DomainError('Resolvent requires a nonzero λ')
        g = TestFunction.from_array(self.model.coords(f))
        if g.is_zero():
            return (-1j / lam) * np.eye(self.boson_dim, dtype=complex)
        key = (float(lam), g)
        cached = self._cache_get(self._inverse_cache, key)
        if cached is not None:
            return cached
        eye = np.eye(self.boson_dim, dtype=complex)
        inverse = self._lu(lam, g).solve(eye)
        shifted = 1j * lam * self._boson_eye - self.boson_field(g)
        residual = float(np.max(np.abs(shifted @ inverse - eye)))
        if residual > self.config.solver_tolerance:
            logger.warning(f'Resolvent solve residual {residual:.2e} above tolerance for λ={lam}')
        inverse.setflags(write=False)
        self._cache_put(self._inverse_cache, key, inverse)
        return inverse

    def boson_resolvent_apply(self, lam: float, f: TestFunction, block: np.ndarray) -> np.ndarray:
        """R(λ, f) applied to the columns of `block` (boson_dim × k) by sparse LU solves."""
        if f.is_zero():
            return (-1j / lam) * block
        return self._lu(lam, f).solve(np.ascontiguousarray(block))

    # ---- atoms on the total space --------------------------------------------

    def atom_factor(self, atom: Atom) -> tuple[str, np.ndarray]:
        """Dense factor of one atom with the side it acts on."""
        if atom.kind == AtomKind.CLIFF:
            return 'fermion', self.fermion_cliff(atom.arg)
        if atom.kind == AtomKind.FIELD:
            return 'boson', self.boson_field(atom.arg).toarray()
        return 'boson', self.boson_resolvent(atom.lam, atom.arg)

    def apply_atom(self, atom: Atom, block: np.ndarray) -> np.ndarray:
        """Apply one atom to a vector reshaped as (fermion_dim, boson_dim)."""
        if atom.kind == AtomKind.CLIFF:
            return self.fermion_cliff(atom.arg) @ block
        if atom.kind == AtomKind.FIELD:
            return (self.boson_field(atom.arg) @ block.T).T
        return self.boson_resolvent_apply(atom.lam, atom.arg, block.T).T

    # ---- vectors -------------------------------------------------------------

    def safe_mask(self, margin: int) -> np.ndarray:
        """Boson basis states whose every mode occupation is ≤ d − margin."""
        if not 0 < margin < self.cutoff:
            raise DomainError(f'safe margin must lie in (0, {self.cutoff}), got {margin}')
        return self._max_occupation <= self.cutoff - margin

    def doubled(self) -> 'Rep | None':
        """Reference representation at cutoff 2d, or None when it exceeds the reference budget."""
        with self._lock:
            if self._doubled_built:
                return self._doubled
        big_config = self.config.model_copy(
            update={'boson_cutoff': 2 * self.cutoff, 'dimension_budget': self.config.reference_budget}
        )
        try:
            big = build_rep(self.model, big_config, frame=self.frame)
        except DimensionBudgetError as e:
            logger.info(f'Cutoff-doubling reference unavailable: {e}')
            big = None
        with self._lock:
            self._doubled = big
            self._doubled_built = True
        return big


# ============================================================
# CONSTRUCTION
# ============================================================


def total_dimension(model: SpaceModel, cutoff: int) -> int:
    n_modes = model.N // 2
    return 2**n_modes * cutoff**n_modes


def build_rep(model: SpaceModel, config: RepConfig | None = None, frame: DarbouxFrame | None = None) -> Rep:
    """Build the truncated representation; raises DimensionBudgetError before allocating anything large."""
    config = config or RepConfig()
    dim = total_dimension(model, config.boson_cutoff)
    if dim > config.dimension_budget:
        raise DimensionBudgetError(dim, config.dimension_budget)
    rep = Rep(model, config, frame=frame)
    logger.info(
        f'Built representation of {model}: cutoff {rep.cutoff}, fermion dim {rep.fermion_dim}, '
        f'boson dim {rep.boson_dim}, total {rep.dim}'
    )
    return rep


# ============================================================
# OPERATORS
# ============================================================


def _lift(rep: Rep, side: str, mat: np.ndarray) -> np.ndarray:
    if side == 'fermion':
        return np.kron(mat, np.eye(rep.boson_dim, dtype=complex))
    return np.kron(np.eye(rep.fermion_dim, dtype=complex), mat)


def op_cliff(rep: Rep, f: Any) -> np.ndarray:
    return _lift(rep, 'fermion', rep.fermion_cliff(f))


def op_field(rep: Rep, f: Any) -> np.ndarray:
    return _lift(rep, 'boson', rep.boson_field(f).toarray())


def op_resolvent(rep: Rep, lam: float, f: Any) -> np.ndarray:
    """π(R(λ, f)) = (iλI − π(j(f)))⁻¹ on the total space."""
    if lam == 0:
        raise DomainError('op_resolvent: λ must be nonzero')
    return _lift(rep, 'boson', rep.boson_resolvent(lam, f))


def _check_model(rep: Rep, expr: Expression):
    if expr.model is not rep.model:
        raise ModelError(f'Expression model {expr.model} does not match representation model {rep.model}')


def word_factors(rep: Rep, word: tuple[Atom, ...]) -> tuple[np.ndarray, np.ndarray]:
    """(fermion product, boson product) of a word; the two factors commute."""
    fermion = np.eye(rep.fermion_dim, dtype=complex)
    boson = np.eye(rep.boson_dim, dtype=complex)
    for atom in word:
        side, mat = rep.atom_factor(atom)
        if side == 'fermion':
            fermion = fermion @ mat
        else:
            boson = boson @ mat
    return fermion, boson


def evaluate(rep: Rep, expr: Expression) -> np.ndarray:
    """Dense matrix π(expr) on the total space."""
    _check_model(rep, expr)
    out = np.zeros((rep.dim, rep.dim), dtype=complex)
    for coeff, word in expr.terms:
        fermion, boson = word_factors(rep, word)
        out += coeff * np.kron(fermion, boson)
    return out


def strong_apply(rep: Rep, expr: Expression, v: np.ndarray) -> np.ndarray:
    """
    π(expr)·v without forming the total-space matrix.

    Terms sharing a boson sub-word are grouped: their fermion parts are summed first and the
    boson atoms are applied once per group.
    """
    _check_model(rep, expr)
    v = np.asarray(v, dtype=complex)
    if v.shape != (rep.dim,):
        raise ModelError(f'Vector has shape {v.shape}, expected ({rep.dim},)')
    block = v.reshape(rep.fermion_dim, rep.boson_dim)
    groups: dict[tuple[Atom, ...], np.ndarray] = {}
    for coeff, word in expr.terms:
        fermion = coeff * np.eye(rep.fermion_dim, dtype=complex)
        boson_atoms = []
        for atom in word:
            if atom.kind == AtomKind.CLIFF:
                fermion = fermion @ rep.fermion_cliff(atom.arg)
            else:
                boson_atoms.append(atom)
        key = tuple(boson_atoms)
        groups[key] = groups[key] + fermion if key in groups else fermion
    out = np.zeros_like(block)
    for boson_atoms, fermion in groups.items():
        w = block
        for atom in reversed(boson_atoms):
            w = rep.apply_atom(atom, w)
        out += fermion @ w
    return out.reshape(-1)


def operator_norm(op: np.ndarray) -> float:
    """Largest singular value."""
    return float(scipy.linalg.svdvals(op)[0])


# Above this total dimension multi-term norms use power iteration instead of a dense SVD
DENSE_NORM_LIMIT = 1024


def _power_norm(rep: Rep, expr: Expression, iterations: int = 200, tol: float = 1e-10) -> float:
    adj = adjoint(expr)
    rng = np.random.default_rng(0)
    v = rng.standard_normal(rep.dim) + 1j * rng.standard_normal(rep.dim)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(iterations):
        w = strong_apply(rep, adj, strong_apply(rep, expr, v))
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        if abs(norm - estimate) <= tol * max(norm, 1.0):
            estimate = norm
            break
        estimate = norm
    return float(np.sqrt(estimate))


def expression_norm(rep: Rep, expr: Expression) -> float:
    """‖π(expr)‖: tensor factorization for single words, dense SVD or power iteration otherwise."""
    if expr.is_zero:
        return 0.0
    if len(expr.terms) == 1:
        coeff, word = expr.terms[0]
        fermion, boson = word_factors(rep, word)
        return abs(coeff) * operator_norm(fermion) * operator_norm(boson)
    if rep.dim > DENSE_NORM_LIMIT:
        return _power_norm(rep, expr)
    return operator_norm(evaluate(rep, expr))


# ============================================================
# VECTORS AND STATES
# ============================================================


def vacuum(rep: Rep) -> np.ndarray:
    """Fermion vacuum ⊗ boson ground state."""
    v = np.zeros(rep.dim, dtype=complex)
    v[0] = 1.0
    return v


def safe_project(rep: Rep, v: np.ndarray, margin: int | None = None) -> np.ndarray:
    """Zero the amplitudes with any mode occupation above d − margin."""
    margin = rep.config.safe_margin if margin is None else margin
    mask = rep.safe_mask(margin)
    block = np.asarray(v, dtype=complex).reshape(rep.fermion_dim, rep.boson_dim)
    return (block * mask[np.newaxis, :]).reshape(-1)


def normalize(v: np.ndarray) -> np.ndarray:
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise DomainError('Cannot normalize the zero vector')
    return v / norm


def state_expectation(rep: Rep, expr: Expression, vector: np.ndarray | None = None) -> complex:
    """ω(A) = ⟨Ω, π(A)Ω⟩ for the Fock vacuum, or for a supplied unit vector."""
    omega = vacuum(rep) if vector is None else np.asarray(vector, dtype=complex)
    return complex(np.vdot(omega, strong_apply(rep, expr, omega)))


def coherent_vector(rep: Rep, f: Any) -> np.ndarray:
    """exp(i·π(j(f)))Ω, renormalized after truncation; a regular non-vacuum GNS vector."""
    boson = scipy.linalg.expm(1j * rep.boson_field(f).toarray())
    v = np.zeros((rep.fermion_dim, rep.boson_dim), dtype=complex)
    v[0, :] = boson[:, 0]
    return normalize(v.reshape(-1))


def embed_vector(v: np.ndarray, small: Rep, large: Rep) -> np.ndarray:
    """Embed a vector at cutoff d into a representation of the same model at cutoff d′ ≥ d."""
    if small.model is not large.model:
        raise ModelError('embed_vector needs representations of the same model')
    if large.cutoff < small.cutoff:
        raise ModelError(f'Cannot embed cutoff {small.cutoff} into smaller cutoff {large.cutoff}')
    shape_small = (small.fermion_dim,) + (small.cutoff,) * small.n_modes
    shape_large = (large.fermion_dim,) + (large.cutoff,) * large.n_modes
    out = np.zeros(shape_large, dtype=complex)
    out[(slice(None),) + (slice(0, small.cutoff),) * small.n_modes] = np.asarray(v).reshape(shape_small)
    return out.reshape(-1)


def random_vectors(rep: Rep, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Unit complex Gaussian vectors on the whole space."""
    return [normalize(rng.standard_normal(rep.dim) + 1j * rng.standard_normal(rep.dim)) for _ in range(count)]


def random_safe_vectors(rep: Rep, count: int, rng: np.random.Generator, margin: int | None = None) -> list[np.ndarray]:
    """Unit complex Gaussian vectors restricted to the safe subspace."""
    return [normalize(safe_project(rep, v, margin)) for v in random_vectors(rep, count, rng)]


def domain_vectors(rep: Rep, words: list[Expression], margin: int | None = None) -> list[np.ndarray]:
    """Vacuum plus π(w)Ω for each bounded word w, safe-projected and normalized; null results are skipped."""
    omega = vacuum(rep)
    out = [omega]
    for w in words:
        v = safe_project(rep, strong_apply(rep, w, omega), margin)
        if np.linalg.norm(v) > 1e-12:
            out.append(normalize(v))
        else:
            logger.debug(f'Skipping test word {w!r}: null vector after projection')
    return out


def equality_residual(rep: Rep, a: Expression, b: Expression, vectors: list[np.ndarray]) -> float:
    """Numeric equality oracle: max_v ‖π(a − b)v‖ / ‖v‖."""
    diff = a - b
    return max(float(np.linalg.norm(strong_apply(rep, diff, v)) / np.linalg.norm(v)) for v in vectors)


# ============================================================
# EXPORT
# ============================================================


def operator_summary(op: np.ndarray) -> dict[str, Any]:
    """Dimension, operator norm and hermiticity residual of a matrix."""
    return {
        'dimension': int(op.shape[0]),
        'norm': operator_norm(op),
        'hermiticity_residual': float(np.max(np.abs(op - op.conj().T))) if op.size else 0.0,
    }


def export_operator(op: np.ndarray, path: str | Path) -> Path:
    """Write the matrix to a compressed .npz container with its summary."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    summary = operator_summary(op)
    np.savez_compressed(path, matrix=op, **{k: np.asarray(v) for k, v in summary.items()})
    logger.info(f'Exported operator of dimension {summary["dimension"]} to {path}')
    return path if path.suffix == '.npz' else path.with_suffix(path.suffix + '.npz')
