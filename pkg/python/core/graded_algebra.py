"""
Graded Algebra
==============
Symbolic engine for the graded *-algebra generated by Clifford elements c(f),
boson fields j(f) and resolvents R(λ, f) = (iλ − j(f))⁻¹.

An Expression is an immutable formal sum of complex-weighted words of atoms. Besides its
terms it carries a provenance flag `core`: expressions built only through ζ(f) = c(f)R(1, f),
R(λ, f) and the unit (and closed under products, sums, adjoints, grading and translations)
are known to lie in the core algebra A∘ without any inference.

Classes returned by `classify`, smallest first:
- R0: resolvents only (includes scalars)
- Cliff0: Clifford elements only
- CoreA: the core algebra A∘ (provenance or a parallel-resolvent decomposition)
- F0: bounded mixed algebra of Clifford elements and resolvents
- EOnly: anything containing an unbounded field j(f)
"""

import logging
from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from numbers import Number
from typing import Any

import numpy as np

from .errors import DomainError, ModelError
from .space_model import SpaceModel, TestFunction, flow, is_symplectic, sigma, tau

logger = logging.getLogger(__name__)

# Coefficients below this magnitude are dropped by simplify
PRUNE_TOLERANCE = 1e-14
# Rewriting budget of eliminate_fields
MAX_ELIMINATION_STEPS = 100_000


class AtomKind(str, Enum):
    CLIFF = 'cliff'
    FIELD = 'field'
    RES = 'res'


class ExprClass(str, Enum):
    R0 = 'R0'
    CLIFF0 = 'Cliff0'
    CORE_A = 'CoreA'
    F0 = 'F0'
    E_ONLY = 'EOnly'


# Subsumption lattice: R0 ⊂ CoreA ⊂ F0 ⊂ EOnly and Cliff0 ⊂ F0
_MEMBERSHIP: dict[ExprClass, frozenset[ExprClass]] = {
    ExprClass.R0: frozenset({ExprClass.R0, ExprClass.CORE_A, ExprClass.F0, ExprClass.E_ONLY}),
    ExprClass.CLIFF0: frozenset({ExprClass.CLIFF0, ExprClass.F0, ExprClass.E_ONLY}),
    ExprClass.CORE_A: frozenset({ExprClass.CORE_A, ExprClass.F0, ExprClass.E_ONLY}),
    ExprClass.F0: frozenset({ExprClass.F0, ExprClass.E_ONLY}),
    ExprClass.E_ONLY: frozenset({ExprClass.E_ONLY}),
}


@dataclass(frozen=True)
class Atom:
    """One generator: c(f), j(f) or R(λ, f)."""

    kind: AtomKind
    arg: TestFunction
    lam: float | None = None

    def __post_init__(self):
        if self.kind == AtomKind.RES:
            if self.lam is None or self.lam == 0.0:
                raise DomainError('Resolvent R(λ, f) requires a nonzero λ')
        elif self.lam is not None:
            raise DomainError(f'Atom {self.kind.value} does not take a λ parameter')

    @property
    def parity(self) -> int:
        return 1 if self.kind == AtomKind.CLIFF else 0

    @property
    def is_boson(self) -> bool:
        return self.kind != AtomKind.CLIFF

    def adjoint(self) -> 'Atom':
        if self.kind == AtomKind.RES:
            return Atom(AtomKind.RES, self.arg, -self.lam)
        return self

    def with_arg(self, arg: TestFunction) -> 'Atom':
        return Atom(self.kind, arg, self.lam)


Word = tuple[Atom, ...]
Term = tuple[complex, Word]


def _fmt_real(x: float) -> str:
    # shortest repr that parses back to the same float
    s = repr(float(x))
    return s[:-2] if s.endswith('.0') else s


def format_coeff(c: complex) -> str:
    if c.imag == 0.0:
        return _fmt_real(c.real)
    if c.real == 0.0:
        return f'{_fmt_real(c.imag)}*i'
    return f'({_fmt_real(c.real)}{"+" if c.imag >= 0 else "-"}{_fmt_real(abs(c.imag))}*i)'


def format_atom(atom: Atom, names: dict[TestFunction, str] | None = None) -> str:
    """Text form of an atom; arguments use bound names when available, else vector literals."""
    arg = (names or {}).get(atom.arg)
    if arg is None:
        arg = '[' + ', '.join(_fmt_real(x) for x in atom.arg.coeffs) + ']'
    if atom.kind == AtomKind.RES:
        return f'res({_fmt_real(atom.lam)}, {arg})'
    return f'{atom.kind.value}({arg})'


@dataclass(frozen=True, eq=False)
class Expression:
    """
    Immutable formal sum of words over a single SpaceModel.

    Equality is structural: same model, same words with identical coefficients.
    """

    model: SpaceModel
    terms: tuple[Term, ...]
    core: bool = False

    __array_ufunc__ = None  # numpy scalars defer to the reflected operators

    # ---- construction helpers -------------------------------------------------

    @classmethod
    def from_terms(cls, model: SpaceModel, terms: Iterable[tuple[Any, Word]], core: bool = False) -> 'Expression':
        """Combine like words, drop exact zeros and keep first-occurrence order."""
        acc: dict[Word, complex] = {}
        for coeff, word in terms:
            acc[word] = acc.get(word, 0j) + complex(coeff)
        return cls(model, tuple((c, w) for w, c in acc.items() if c != 0), core)

    # ---- inspection ------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def atoms(self) -> Iterable[Atom]:
        for _, word in self.terms:
            yield from word

    def term_parities(self) -> set[int]:
        return {sum(a.parity for a in word) % 2 for _, word in self.terms}

    @property
    def is_homogeneous(self) -> bool:
        return len(self.term_parities()) <= 1

    @property
    def parity(self) -> int | None:
        """0 or 1 for homogeneous expressions (0 for the zero expression), None otherwise."""
        parities = self.term_parities()
        if not parities:
            return 0
        return parities.pop() if len(parities) == 1 else None

    def as_dict(self) -> dict[Word, complex]:
        return {w: c for c, w in self.terms}

    # ---- arithmetic ------------------------------------------------------------

    def _check_model(self, other: 'Expression'):
        if other.model is not self.model:
            raise ModelError(f'Cannot combine expressions over different models: {self.model} vs {other.model}')

    def _coerce(self, other: Any) -> 'Expression':
        if isinstance(other, Expression):
            self._check_model(other)
            return other
        if isinstance(other, Number):
            return scalar(self.model, complex(other))
        return NotImplemented

    def __add__(self, other: Any) -> 'Expression':
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __neg__(self) -> 'Expression':
        return scale(self, -1.0)

    def __sub__(self, other: Any) -> 'Expression':
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return add(self, scale(other, -1.0))

    def __rsub__(self, other: Any) -> 'Expression':
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return add(other, scale(self, -1.0))

    def __mul__(self, other: Any) -> 'Expression':
        if isinstance(other, Number):
            return scale(self, complex(other))
        if isinstance(other, Expression):
            return mul(self, other)
        return NotImplemented

    def __rmul__(self, other: Any) -> 'Expression':
        if isinstance(other, Number):
            return scale(self, complex(other))
        return NotImplemented

    def __truediv__(self, other: Any) -> 'Expression':
        if isinstance(other, Number):
            return scale(self, 1.0 / complex(other))
        return NotImplemented

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Expression):
            return NotImplemented
        return self.model is other.model and self.as_dict() == other.as_dict()

    def __hash__(self) -> int:
        return hash((id(self.model), frozenset(self.as_dict().items())))

    def __repr__(self) -> str:
        if not self.terms:
            return '0'
        parts = []
        for c, word in self.terms:
            body = '*'.join(format_atom(a) for a in word)
            if not body:
                parts.append(format_coeff(c))
            elif c == 1:
                parts.append(body)
            else:
                parts.append(f'{format_coeff(c)}*{body}')
        return ' + '.join(parts)


# ============================================================
# CONSTRUCTORS
# ============================================================


def _arg(model: SpaceModel, f: Any) -> TestFunction:
    return TestFunction.from_array(model.coords(f))


def zero(model: SpaceModel) -> Expression:
    return Expression(model, (), core=True)


def unit(model: SpaceModel) -> Expression:
    return Expression(model, ((1 + 0j, ()),), core=True)


def scalar(model: SpaceModel, value: complex) -> Expression:
    return Expression.from_terms(model, [(value, ())], core=True)


def res(model: SpaceModel, lam: float, f: Any) -> Expression:
    """R(λ, f); λ = 0 is rejected, f = 0 is allowed (simplify reduces it to −(i/λ)·1)."""
    if lam == 0:
        raise DomainError('res: λ must be nonzero')
    return Expression(model, ((1 + 0j, (Atom(AtomKind.RES, _arg(model, f), float(lam)),)),), core=True)


def cliff(model: SpaceModel, f: Any) -> Expression:
    return Expression(model, ((1 + 0j, (Atom(AtomKind.CLIFF, _arg(model, f)),)),), core=False)


def field(model: SpaceModel, f: Any) -> Expression:
    return Expression(model, ((1 + 0j, (Atom(AtomKind.FIELD, _arg(model, f)),)),), core=False)


def zeta(model: SpaceModel, f: Any) -> Expression:
    """Mollified fermion field ζ(f) = c(f)R(1, f), stored as a two-atom word."""
    g = _arg(model, f)
    word = (Atom(AtomKind.CLIFF, g), Atom(AtomKind.RES, g, 1.0))
    return Expression(model, ((1 + 0j, word),), core=True)


# ============================================================
# ALGEBRA OPERATIONS
# ============================================================


def add(a: Expression, b: Expression) -> Expression:
    a._check_model(b)
    return Expression.from_terms(a.model, [*a.terms, *b.terms], core=a.core and b.core)


def mul(a: Expression, b: Expression) -> Expression:
    a._check_model(b)
    terms = [(ca * cb, wa + wb) for ca, wa in a.terms for cb, wb in b.terms]
    return Expression.from_terms(a.model, terms, core=a.core and b.core)


def scale(a: Expression, c: complex) -> Expression:
    return Expression.from_terms(a.model, [(c * coeff, w) for coeff, w in a.terms], core=a.core)


def adjoint(a: Expression) -> Expression:
    """Reverse words, conjugate coefficients, R(λ, f) ↦ R(−λ, f); c and j are self-adjoint."""
    terms = [(coeff.conjugate(), tuple(atom.adjoint() for atom in reversed(w))) for coeff, w in a.terms]
    return Expression.from_terms(a.model, terms, core=a.core)


def grade(a: Expression) -> Expression:
    """Grading automorphism γ: each term picks up (−1)^{#Clifford atoms}."""
    terms = [(coeff * (-1) ** sum(x.parity for x in w), w) for coeff, w in a.terms]
    return Expression.from_terms(a.model, terms, core=a.core)


def commutator(a: Expression, b: Expression) -> Expression:
    return a * b - b * a


def graded_commutator(a: Expression, b: Expression) -> Expression:
    """[a, b} = ab − (−1)^{|a||b|} ba, expanded over homogeneous terms."""
    a._check_model(b)
    out = zero(a.model)
    for ca, wa in a.terms:
        pa = sum(x.parity for x in wa) % 2
        for cb, wb in b.terms:
            pb = sum(x.parity for x in wb) % 2
            sign = -1.0 if pa * pb else 1.0
            out = out + Expression.from_terms(a.model, [(ca * cb, wa + wb), (-sign * ca * cb, wb + wa)])
    return out


def substitute(a: Expression, mapping) -> Expression:
    """Replace every atom argument f by mapping(f); λ, coefficients and word order unchanged."""
    cache: dict[TestFunction, TestFunction] = {}

    def image(f: TestFunction) -> TestFunction:
        if f not in cache:
            cache[f] = mapping(f)
        return cache[f]

    terms = [(c, tuple(atom.with_arg(image(atom.arg)) for atom in w)) for c, w in a.terms]
    return Expression.from_terms(a.model, terms, core=a.core)


def translate(a: Expression, t: float) -> Expression:
    """α_t by argument substitution f ↦ T_t f."""
    if t == 0:
        return a
    return substitute(a, lambda f: flow(a.model, t, f))


def bogoliubov(a: Expression, T: Any, tol: float = 1e-10) -> Expression:
    """Quasi-free automorphism α_T for a symplectic, τ-orthogonal map T."""
    model = a.model
    t_m = np.asarray(T, dtype=float)
    if t_m.shape != (model.N, model.N):
        raise DomainError(f'Bogoliubov map has shape {t_m.shape}, expected {(model.N, model.N)}')
    if not is_symplectic(model, t_m, tol=tol):
        raise DomainError('Bogoliubov map does not preserve σ')
    if np.max(np.abs(t_m.T @ model.tau_matrix @ t_m - model.tau_matrix)) > tol:
        raise DomainError('Bogoliubov map does not preserve τ')
    return substitute(a, lambda f: TestFunction.from_array(t_m @ f.array))


# ============================================================
# NORMAL FORM
# ============================================================


@lru_cache(maxsize=65536)
def _normal_order(model: SpaceModel, idx: tuple[int, ...]) -> tuple[tuple[tuple[int, ...], float], ...]:
    """Sort a word of basis Clifford generators using c_a c_b = −c_b c_a + τ_ab and c_a c_a = τ_aa/2."""
    for p in range(len(idx) - 1):
        a, b = idx[p], idx[p + 1]
        rest = idx[:p] + idx[p + 2 :]
        if a == b:
            return _scaled(_normal_order(model, rest), model.tau_matrix[a, a] / 2.0)
        if a > b:
            out = _scaled(_normal_order(model, idx[:p] + (b, a) + idx[p + 2 :]), -1.0)
            tau_ab = float(model.tau_matrix[a, b])
            if tau_ab != 0.0:
                out = _merge(out, _scaled(_normal_order(model, rest), tau_ab))
            return out
    return ((idx, 1.0),)


def _scaled(items, factor: float):
    return tuple((k, v * factor) for k, v in items)


def _merge(left, right):
    acc: dict[tuple[int, ...], float] = defaultdict(float)
    for k, v in (*left, *right):
        acc[k] += v
    return tuple((k, v) for k, v in acc.items() if v != 0.0)


def clifford_normal_form(model: SpaceModel, atoms: Iterable[Atom]) -> dict[tuple[int, ...], complex]:
    """Expand a product of Clifford atoms in the basis and normal-order it."""
    result: dict[tuple[int, ...], complex] = {(): 1 + 0j}
    for atom in atoms:
        nxt: dict[tuple[int, ...], complex] = defaultdict(complex)
        for idx, c in result.items():
            for i, a in enumerate(atom.arg.coeffs):
                if a == 0.0:
                    continue
                for oidx, oc in _normal_order(model, idx + (i,)):
                    nxt[oidx] += c * a * oc
        result = {k: v for k, v in nxt.items() if v != 0}
    return result


def _normalize_boson_atom(atom: Atom) -> tuple[complex, Atom | None]:
    """
    Scalar reductions of single boson atoms.

    R(λ, 0) = −(i/λ)·1 and j(0) = 0; a resolvent whose argument has a negative leading
    coefficient is flipped with R(λ, −f) = −R(−λ, f) so equal operators get equal atoms.
    """
    if atom.arg.is_zero():
        if atom.kind == AtomKind.RES:
            return -1j / atom.lam, None
        return 0j, None
    if atom.kind == AtomKind.RES:
        lead = next(x for x in atom.arg.coeffs if x != 0.0)
        if lead < 0:
            return -1 + 0j, Atom(AtomKind.RES, -atom.arg, -atom.lam)
    return 1 + 0j, atom


def _merge_resolvents(coeff: complex, word: Word) -> list[Term]:
    """Expand adjacent R(λ, f)R(μ, f), λ ≠ μ, into (R(λ, f) − R(μ, f)) / (i(μ − λ))."""
    done: list[Term] = []
    pending: list[Term] = [(coeff, word)]
    while pending:
        c, w = pending.pop()
        for p in range(len(w) - 1):
            x, y = w[p], w[p + 1]
            if x.kind == y.kind == AtomKind.RES and x.arg == y.arg and x.lam != y.lam:
                factor = 1.0 / (1j * (y.lam - x.lam))
                pending.append((c * factor, w[:p] + (x,) + w[p + 2 :]))
                pending.append((-c * factor, w[:p] + (y,) + w[p + 2 :]))
                break
        else:
            done.append((c, w))
    return done


def simplify(a: Expression, merge_resolvents: bool = False) -> Expression:
    """
    Normal form per term.

    Clifford atoms move to the left (they commute with fields and resolvents), get expanded
    in the model basis and sorted with anticommutation signs and τ-contractions. Boson
    sub-words keep their order; only scalar reductions and, on request, the same-argument
    resolvent identity are applied. Coefficients below PRUNE_TOLERANCE are dropped.

    The core flag survives only when no Clifford word had to be rewritten: expanding c(f) in
    the basis detaches its fields from the resolvent R(λ, f), so the result is classified
    again by decomposition.
    """
    model = a.model
    acc: dict[Word, complex] = defaultdict(complex)
    core = a.core
    for coeff, word in a.terms:
        cliffs = [x for x in word if x.kind == AtomKind.CLIFF]
        c = coeff
        bosons: list[Atom] = []
        for atom in word:
            if atom.kind == AtomKind.CLIFF:
                continue
            factor, reduced = _normalize_boson_atom(atom)
            c *= factor
            if reduced is not None:
                bosons.append(reduced)
        if c == 0:
            continue
        boson_terms = _merge_resolvents(c, tuple(bosons)) if merge_resolvents else [(c, tuple(bosons))]
        cliff_form = clifford_normal_form(model, cliffs)
        for idx, cc in cliff_form.items():
            cliff_word = tuple(Atom(AtomKind.CLIFF, model.basis(i)) for i in idx)
            if core and (len(cliff_form) != 1 or cc != 1 or cliff_word != tuple(cliffs)):
                core = False
            for bc, bw in boson_terms:
                acc[cliff_word + bw] += cc * bc
    terms = [(c, w) for w, c in acc.items() if abs(c) >= PRUNE_TOLERANCE]
    return Expression.from_terms(model, terms, core=core)


# ============================================================
# CLASSIFICATION
# ============================================================


def _max_matching(cliffs: list[Atom], resolvents: list[Atom]) -> int:
    """Size of a maximum matching between Clifford atoms and resolvents with parallel arguments."""
    edges = [[k for k, r in enumerate(resolvents) if c.arg.parallel_factor(r.arg) is not None] for c in cliffs]
    owner: dict[int, int] = {}

    def augment(i: int, seen: set[int]) -> bool:
        for k in edges[i]:
            if k in seen:
                continue
            seen.add(k)
            if k not in owner or augment(owner[k], seen):
                owner[k] = i
                return True
        return False

    return sum(1 for i in range(len(cliffs)) if augment(i, set()))


def is_core_decomposable(a: Expression) -> bool:
    """
    Sufficient test for membership in A∘.

    A field-free term lies in A∘ when each Clifford atom can be paired with its own
    resolvent of parallel argument, since c(g)R(λ, s·g) = ζ(s·g/λ)/s and Clifford atoms
    commute with resolvents.
    """
    for _, word in a.terms:
        if any(x.kind == AtomKind.FIELD for x in word):
            return False
        cliffs = [x for x in word if x.kind == AtomKind.CLIFF]
        if not cliffs:
            continue
        resolvents = [x for x in word if x.kind == AtomKind.RES]
        if _max_matching(cliffs, resolvents) < len(cliffs):
            return False
    return True


def classify(a: Expression) -> ExprClass:
    """
    Smallest class by atom census; CoreA by provenance or by decomposition.

    A Clifford-only word such as c(f) is Cliff0, the smallest class holding it. Cliff0 sits
    inside F0 and outside CoreA, so is_member(cliff(f), 'F0') holds and in_core(cliff(f)) does not.
    """
    kinds = {x.kind for x in a.atoms()}
    if AtomKind.FIELD in kinds:
        return ExprClass.E_ONLY
    if AtomKind.CLIFF not in kinds:
        return ExprClass.R0
    if AtomKind.RES not in kinds:
        return ExprClass.CLIFF0
    if a.core or is_core_decomposable(a):
        return ExprClass.CORE_A
    return ExprClass.F0


def is_member(a: Expression, cls: ExprClass | str) -> bool:
    return ExprClass(cls) in _MEMBERSHIP[classify(a)]


def in_core(a: Expression) -> bool:
    return is_member(a, ExprClass.CORE_A)


def promote_core(a: Expression) -> Expression:
    """Mark a decomposable expression as core so later δs applications accept it."""
    if not in_core(a):
        raise DomainError(f'Expression of class {classify(a).value} is not in the core algebra')
    return Expression(a.model, a.terms, core=True)


# ============================================================
# FIELD ELIMINATION
# ============================================================


def _parallel_target(word: Word, pos: int) -> tuple[int, float] | None:
    """Nearest resolvent parallel to the field at `pos`, searching right first."""
    g = word[pos].arg
    for q in (*range(pos + 1, len(word)), *range(pos - 1, -1, -1)):
        atom = word[q]
        if atom.kind == AtomKind.RES:
            s = g.parallel_factor(atom.arg)
            if s is not None:
                return q, s
    return None


def _eliminate_step(model: SpaceModel, coeff: complex, word: Word) -> list[Term] | None:
    """
    Rewrite one field of `word` one step; None when the word is field-free.

    The field closest to its target resolvent moves, so each step either absorbs a field or
    shortens the smallest field-to-target distance of the word.
    """
    best: tuple[int, int, int, float] | None = None
    for pos, atom in enumerate(word):
        if atom.kind != AtomKind.FIELD:
            continue
        found = _parallel_target(word, pos)
        if found is None:
            raise DomainError(
                f'Cannot eliminate {format_atom(atom)}: no resolvent with a parallel argument in the word'
            )
        distance = abs(found[0] - pos)
        if best is None or distance < best[0]:
            best = (distance, pos, *found)
    if best is None:
        return None
    _, pos, target, s = best
    j_atom = word[pos]
    step = 1 if target > pos else -1
    nb = pos + step
    neighbour = word[nb]
    g = j_atom.arg

    if nb == target:
        # j(g)R(λ, s·g) = R(λ, s·g)j(g) = (iλR(λ, s·g) − 1)/s
        head, tail = word[: min(pos, nb)], word[max(pos, nb) + 1 :]
        return [(coeff * 1j * neighbour.lam / s, head + (neighbour,) + tail), (-coeff / s, head + tail)]

    swapped = list(word)
    swapped[pos], swapped[nb] = neighbour, j_atom
    out: list[Term] = [(coeff, tuple(swapped))]
    if neighbour.kind == AtomKind.CLIFF:
        return out
    k = neighbour.arg
    # moving right: j(g)X = Xj(g) + [j(g), X]; moving left: Xj(g) = j(g)X − [j(g), X]
    sign = 1.0 if step == 1 else -1.0
    s_gk = sigma(model, g, k)
    if s_gk == 0.0:
        return out
    lo = min(pos, nb)
    if neighbour.kind == AtomKind.RES:
        out.append((sign * coeff * 1j * s_gk, word[:lo] + (neighbour, neighbour) + word[lo + 2 :]))
    else:
        out.append((sign * coeff * 1j * s_gk, word[:lo] + word[lo + 2 :]))
    return out


def eliminate_fields(a: Expression, max_steps: int = MAX_ELIMINATION_STEPS) -> Expression:
    """
    Rewrite every field j(g) into resolvent form.

    Each field travels to a resolvent with parallel argument using
    [j(g), R(μ, k)] = iσ(g, k)R(μ, k)² and [j(g), j(k)] = iσ(g, k), passes Clifford atoms
    freely, and is absorbed with j(g)R(λ, s·g) = (iλR(λ, s·g) − 1)/s.
    Raises DomainError when some field has no parallel resolvent in its word, or when the
    rewriting takes more than max_steps steps.
    """
    done: list[Term] = []
    pending: list[Term] = list(a.terms)
    steps = 0
    while pending:
        coeff, word = pending.pop()
        nxt = _eliminate_step(a.model, coeff, word)
        if nxt is None:
            done.append((coeff, word))
            continue
        steps += 1
        if steps > max_steps:
            raise DomainError(f'Field elimination did not finish within {max_steps} rewriting steps')
        pending.extend(nxt)
    return Expression.from_terms(a.model, done, core=False)


# ============================================================
# APPROXIMATION NET
# ============================================================


def density_net(a: Expression, lam: float) -> Expression:
    """
    B(λ): every Clifford atom c(f) is replaced by iλζ(f/λ) = i·c(f)R(1, f/λ).

    The result is in A∘ and converges strongly to B as λ → ∞.
    """
    if lam <= 0:
        raise DomainError(f'density_net: λ must be positive, got {lam}')
    if any(x.kind == AtomKind.FIELD for x in a.atoms()):
        raise DomainError('density_net: expression contains unbounded fields')
    terms = []
    for coeff, word in a.terms:
        c = coeff
        new_word: list[Atom] = []
        for atom in word:
            if atom.kind == AtomKind.CLIFF:
                c *= 1j
                new_word.extend([atom, Atom(AtomKind.RES, atom.arg / lam, 1.0)])
            else:
                new_word.append(atom)
        terms.append((c, tuple(new_word)))
    return Expression.from_terms(a.model, terms, core=True)


def net_factor_bound(model: SpaceModel, f: Any) -> float:
    """Uniform bound ‖λζ(f/λ)‖ = ‖c(f)‖ = √(τ(f, f)/2)."""
    return float(np.sqrt(tau(model, f, f) / 2.0))
