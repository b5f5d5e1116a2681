"""
Superderivations
================
The supercharge δ̄s and the time generator δ̄h on the extended algebra, the
superderivation δs on the core algebra A∘ with its conjugate δs*, and the
mollifiers M_{A,λ} that pull δs(A) and the heuristic square δs²(A) back into
bounded elements.

Atom rules (f′ = −S f):
    δ̄s(c(f)) = j(f)        δ̄s(j(f)) = i c(f′)        δ̄s(R(λ,f)) = i c(f′)R(λ,f)²
    δ̄h(c(f)) = i c(f′)     δ̄h(j(f)) = i j(f′)        δ̄h(R(λ,f)) = i R(λ,f) j(f′) R(λ,f)

δ̄s is extended with the graded Leibniz rule δ(AB) = δ(A)B + γ(A)δ(B), δ̄h with the
ordinary one.
"""

import logging
from collections.abc import Callable

from .errors import DomainError
from .graded_algebra import (
    Atom,
    AtomKind,
    ExprClass,
    Expression,
    Term,
    adjoint,
    classify,
    eliminate_fields,
    grade,
    promote_core,
    res,
    simplify,
    unit,
)
from .space_model import SpaceModel, prime

logger = logging.getLogger(__name__)

AtomRule = Callable[[SpaceModel, Atom], list[Term]]


def _supercharge_rule(model: SpaceModel, atom: Atom) -> list[Term]:
    if atom.kind == AtomKind.CLIFF:
        return [(1 + 0j, (Atom(AtomKind.FIELD, atom.arg),))]
    fp = prime(model, atom.arg)
    if atom.kind == AtomKind.FIELD:
        return [(1j, (Atom(AtomKind.CLIFF, fp),))]
    return [(1j, (Atom(AtomKind.CLIFF, fp), atom, atom))]


def _time_rule(model: SpaceModel, atom: Atom) -> list[Term]:
    fp = prime(model, atom.arg)
    if atom.kind == AtomKind.CLIFF:
        return [(1j, (Atom(AtomKind.CLIFF, fp),))]
    if atom.kind == AtomKind.FIELD:
        return [(1j, (Atom(AtomKind.FIELD, fp),))]
    return [(1j, (atom, Atom(AtomKind.FIELD, fp), atom))]


def _leibniz(a: Expression, rule: AtomRule, graded: bool) -> Expression:
    terms: list[Term] = []
    for coeff, word in a.terms:
        sign = 1.0
        for k, atom in enumerate(word):
            for rc, replacement in rule(a.model, atom):
                terms.append((sign * coeff * rc, word[:k] + replacement + word[k + 1 :]))
            if graded and atom.parity:
                sign = -sign
    return Expression.from_terms(a.model, terms, core=False)


def superderivation_bar(a: Expression) -> Expression:
    """δ̄s on the extended algebra (graded Leibniz rule, applied termwise)."""
    return _leibniz(a, _supercharge_rule, graded=True)


def derivation_bar(a: Expression) -> Expression:
    """δ̄h on the extended algebra (ordinary Leibniz rule)."""
    return _leibniz(a, _time_rule, graded=False)


def superderivation_square_bar(a: Expression) -> Expression:
    """δ̄s(δ̄s(A)); equals δ̄h(A) in the algebra."""
    return superderivation_bar(superderivation_bar(a))


def _require_core(a: Expression, operation: str):
    cls = classify(a)
    if cls not in (ExprClass.CORE_A, ExprClass.R0):
        raise DomainError(f'{operation} is defined on the core algebra only; got an expression of class {cls.value}')


def superderivation_core(a: Expression) -> Expression:
    """
    δs on A∘: δ̄s(A) with every field rewritten into resolvent form, so the result is in F0.

    For the generators this gives δs(ζ(f)) = iR(1,f) − 1 − i c(f)c(f′)R(1,f)² and
    δs(R(λ,f)) = i c(f′)R(λ,f)². An expression whose ζ(f) was split by `simplify` into
    basis Clifford atoms is no longer in A∘ and is rejected with a DomainError; use
    `promote_core` when the simplified form is known to lie in A∘.
    """
    _require_core(a, 'δs')
    try:
        return eliminate_fields(superderivation_bar(a))
    except DomainError as e:
        raise DomainError(f'δs could not express δ̄s(A) in F0: {e}') from e


def conjugate_superderivation(a: Expression) -> Expression:
    """δs*(A) = −(δs(γ(A*)))*, offered on A∘ only."""
    _require_core(a, 'δs*')
    return -adjoint(superderivation_core(grade(adjoint(a))))


# ============================================================
# MOLLIFIERS
# ============================================================


def mollifier_indices(a: Expression) -> list[int]:
    """Sorted basis indices of the Clifford atoms in simplify(δ̄s(A))."""
    indices = set()
    for atom in simplify(superderivation_bar(a)).atoms():
        if atom.kind == AtomKind.CLIFF:
            indices.add(int(next(i for i, x in enumerate(atom.arg.coeffs) if x != 0.0)))
    return sorted(indices)


def mollifier(a: Expression, lam: float) -> Expression:
    """
    M_{A,λ} = Π_{a∈G} iλR(λ, e_a) over the sorted index set G of `mollifier_indices`.

    Every factor has norm one and tends strongly to the identity as λ → ∞; for A with no
    Clifford content in δ̄s(A) the product is empty and M = 1.
    """
    if lam <= 0:
        raise DomainError(f'mollifier: λ must be positive, got {lam}')
    _require_core(a, 'mollifier')
    model = a.model
    m = unit(model)
    for index in mollifier_indices(a):
        m = m * (1j * lam * res(model, lam, model.basis(index)))
    return m


def mollified_product(a: Expression, lam: float) -> Expression:
    """M_{A,λ}·δs(A), simplified and checked to lie in A∘."""
    m = mollifier(a, lam)
    product = simplify(m * superderivation_core(a))
    try:
        return promote_core(product)
    except DomainError as e:
        raise DomainError(f'mollifier failed to pull δs(A) into the core algebra: {e}') from e


def mollified_square(a: Expression, lam: float) -> Expression:
    """
    δs(M_{A,λ}δs(A)) − δs(M_{A,λ})δs(A).

    By the graded Leibniz rule this equals M_{A,λ}·δ̄s²(A) with every term bounded.
    """
    m = mollifier(a, lam)
    ds_a = superderivation_core(a)
    return superderivation_core(mollified_product(a, lam)) - superderivation_core(m) * ds_a
