"""Tests for the symbolic graded algebra: construction, normal form, classes and field elimination."""

import numpy as np
import pytest

from core.errors import DomainError, ModelError
from core.graded_algebra import (
    AtomKind,
    ExprClass,
    adjoint,
    bogoliubov,
    classify,
    cliff,
    density_net,
    eliminate_fields,
    field,
    grade,
    graded_commutator,
    in_core,
    is_member,
    net_factor_bound,
    promote_core,
    res,
    scalar,
    simplify,
    translate,
    unit,
    zero,
    zeta,
)
from core.space_model import build_canonical_pairs


@pytest.fixture(scope='module')
def model():
    return build_canonical_pairs(1)


@pytest.fixture(scope='module')
def e0(model):
    return model.basis(0)


@pytest.fixture(scope='module')
def e1(model):
    return model.basis(1)


class TestConstruction:
    """Constructors, provenance flags and arithmetic."""

    def test_zero_lambda_rejected(self, model, e0):
        with pytest.raises(DomainError):
            res(model, 0.0, e0)

    def test_core_provenance(self, model, e0):
        assert zeta(model, e0).core
        assert res(model, 2.0, e0).core
        assert unit(model).core
        assert not cliff(model, e0).core
        assert not field(model, e0).core
        assert (zeta(model, e0) * res(model, 1.0, e0)).core
        assert not (cliff(model, e0) * res(model, 1.0, e0)).core

    def test_like_terms_combine(self, model, e0):
        expr = res(model, 1.0, e0) + res(model, 1.0, e0)
        assert expr == 2 * res(model, 1.0, e0)
        assert (expr - expr).is_zero

    def test_numbers_coerce(self, model, e0):
        expr = 1 - res(model, 1.0, e0)
        assert expr == scalar(model, 1.0) + (-1) * res(model, 1.0, e0)

    def test_models_cannot_mix(self, model, e0):
        other = build_canonical_pairs(1)
        with pytest.raises(ModelError):
            res(model, 1.0, e0) + res(other, 1.0, other.basis(0))

    def test_parity(self, model, e0, e1):
        assert cliff(model, e0).parity == 1
        assert (cliff(model, e0) * cliff(model, e1)).parity == 0
        assert (cliff(model, e0) + res(model, 1.0, e0)).parity is None
        assert zero(model).parity == 0


class TestInvolutionAndGrading:
    def test_adjoint_of_resolvent_flips_lambda(self, model, e0):
        assert adjoint(res(model, 2.0, e0)) == res(model, -2.0, e0)

    def test_adjoint_reverses_and_conjugates(self, model, e0, e1):
        expr = 1j * cliff(model, e0) * res(model, 1.0, e1)
        assert adjoint(expr) == -1j * res(model, -1.0, e1) * cliff(model, e0)

    def test_grade_is_parity_sign(self, model, e0):
        assert grade(cliff(model, e0)) == -cliff(model, e0)
        assert grade(zeta(model, e0)) == -zeta(model, e0)
        assert grade(res(model, 1.0, e0)) == res(model, 1.0, e0)

    def test_graded_commutator_of_cliffords_is_anticommutator(self, model, e0):
        c = cliff(model, e0)
        assert simplify(graded_commutator(c, c)) == scalar(model, 1.0)


class TestSimplify:
    """Normal form of Clifford products and scalar reductions."""

    def test_square_of_cliff(self, model, e0):
        assert simplify(cliff(model, e0) * cliff(model, e0)) == scalar(model, 0.5)

    def test_anticommutation_ordering(self, model, e0, e1):
        assert simplify(cliff(model, e1) * cliff(model, e0)) == -cliff(model, e0) * cliff(model, e1)

    def test_cliffords_move_left(self, model, e0, e1):
        expr = res(model, 1.0, e1) * cliff(model, e0)
        assert simplify(expr) == cliff(model, e0) * res(model, 1.0, e1)

    def test_basis_expansion(self, model):
        f = model.coords([1.0, 1.0])
        expected = cliff(model, model.basis(0)) + cliff(model, model.basis(1))
        assert simplify(cliff(model, f)) == expected

    def test_resolvent_at_zero_function(self, model):
        assert simplify(res(model, 2.0, [0.0, 0.0])) == scalar(model, -0.5j)

    def test_negative_argument_is_flipped(self, model, e0):
        assert simplify(res(model, 1.0, -e0)) == -res(model, -1.0, e0)

    def test_field_at_zero_function_vanishes(self, model):
        assert simplify(field(model, [0.0, 0.0]) * res(model, 1.0, [1.0, 0.0])).is_zero

    def test_merge_resolvents(self, model, e0):
        expr = res(model, 1.0, e0) * res(model, 2.0, e0)
        merged = simplify(expr, merge_resolvents=True)
        assert merged == -1j * res(model, 1.0, e0) + 1j * res(model, 2.0, e0)

    def test_core_flag_survives(self, model, e0):
        assert simplify(zeta(model, e0)).core

    def test_basis_expansion_drops_core_flag(self, model):
        # c(f) with f off the basis splits into c(e0), c(e1); neither is parallel to R(1, f)
        f = model.coords([0.6, 0.8])
        expanded = simplify(zeta(model, f))
        assert not expanded.core
        assert classify(expanded) == ExprClass.F0
        assert not in_core(expanded)

    def test_products_keep_core_flag_when_words_are_normal(self, model, e0, e1):
        assert simplify(zeta(model, e0) * zeta(model, e1)).core


class TestClassify:
    """Classification lattice."""

    def test_atom_census(self, model, e0):
        assert classify(res(model, 1.0, e0)) == ExprClass.R0
        assert classify(unit(model)) == ExprClass.R0
        assert classify(cliff(model, e0)) == ExprClass.CLIFF0
        assert classify(field(model, e0) * res(model, 1.0, e0)) == ExprClass.E_ONLY

    def test_clifford_only_word_is_cliff0_not_core(self, model, e0, e1):
        # c(f) alone has no parallel resolvent: Cliff0 inside F0, outside A∘
        c = cliff(model, e0 + e1)
        assert classify(c) == ExprClass.CLIFF0
        assert is_member(c, ExprClass.F0)
        assert not is_member(c, ExprClass.CORE_A)
        assert not in_core(c)

    def test_core_by_provenance(self, model, e0, e1):
        assert classify(zeta(model, e0) * zeta(model, e1)) == ExprClass.CORE_A

    def test_core_by_decomposition(self, model, e0):
        # c(e0)R(2, 3·e0) = ζ(3e0/2)/3 after commuting
        expr = res(model, 2.0, 3 * e0) * cliff(model, e0)
        assert not expr.core
        assert classify(expr) == ExprClass.CORE_A

    def test_mixed_without_parallel_resolvent(self, model, e0, e1):
        assert classify(cliff(model, e0) * res(model, 1.0, e1)) == ExprClass.F0

    def test_each_cliff_needs_its_own_resolvent(self, model, e0):
        expr = cliff(model, e0) * cliff(model, e0 + e0) * res(model, 1.0, e0)
        assert classify(expr) == ExprClass.F0

    def test_membership_lattice(self, model, e0):
        r = res(model, 1.0, e0)
        assert is_member(r, ExprClass.CORE_A)
        assert is_member(r, 'F0')
        assert not is_member(cliff(model, e0), ExprClass.CORE_A)
        assert is_member(cliff(model, e0), ExprClass.F0)
        assert not is_member(field(model, e0), ExprClass.F0)
        assert in_core(zeta(model, e0))

    def test_promote_core(self, model, e0, e1):
        promoted = promote_core(cliff(model, e0) * res(model, 1.0, e0))
        assert promoted.core
        with pytest.raises(DomainError):
            promote_core(cliff(model, e0) * res(model, 1.0, e1))


class TestEliminateFields:
    """Rewriting fields into resolvent form."""

    def test_adjacent_parallel_resolvent(self, model, e0):
        expr = field(model, e0) * res(model, 2.0, e0)
        assert eliminate_fields(expr) == 2j * res(model, 2.0, e0) - 1

    def test_scaled_parallel_resolvent(self, model, e0):
        # j(e0)R(1, 2e0) = (iR(1, 2e0) − 1)/2
        expr = field(model, e0) * res(model, 1.0, 2 * e0)
        assert eliminate_fields(expr) == 0.5j * res(model, 1.0, 2 * e0) - 0.5

    def test_passes_other_resolvent_with_commutator(self, model, e0, e1):
        # j(e0)R(1,e1)R(1,e0) = R(1,e1)j(e0)R(1,e0) + iσ(e0,e1)R(1,e1)²R(1,e0)
        expr = field(model, e0) * res(model, 1.0, e1) * res(model, 1.0, e0)
        r1, r0 = res(model, 1.0, e1), res(model, 1.0, e0)
        expected = r1 * (1j * r0 - 1) + 1j * r1 * r1 * r0
        assert eliminate_fields(expr) == expected

    def test_lone_field_rejected(self, model, e0, e1):
        with pytest.raises(DomainError):
            eliminate_fields(field(model, e0))
        with pytest.raises(DomainError):
            eliminate_fields(field(model, e0) * res(model, 1.0, e1))

    def test_field_free_expression_unchanged(self, model, e0):
        expr = zeta(model, e0) * res(model, 2.0, e0)
        assert eliminate_fields(expr) == expr

    def test_crossing_fields_terminate(self, model, e0, e1):
        # j(e0)j(e1)R(1,e1)R(1,e0): each field must pass the other's resolvent
        r0, r1 = res(model, 1.0, e0), res(model, 1.0, e1)
        expr = field(model, e0) * field(model, e1) * r1 * r0
        out = eliminate_fields(expr)
        assert all(atom.kind != AtomKind.FIELD for atom in out.atoms())
        # j(e1)R(1,e1) = iR(1,e1) − 1, then j(e0) passes R(1,e1) with σ(e0,e1) = 1
        expected = (1j * r1 - 1) * (1j * r0 - 1) + 1j * (1j * r1 * r1 * r0)
        assert simplify(out - expected).is_zero

    def test_nested_fields_terminate(self, model, e0, e1):
        expr = field(model, e0) * field(model, e1) * field(model, e0) * res(model, 1.0, e0) * res(model, 2.0, e1)
        out = eliminate_fields(expr)
        assert all(atom.kind != AtomKind.FIELD for atom in out.atoms())

    def test_step_budget(self, model, e0, e1):
        expr = field(model, e0) * field(model, e1) * res(model, 1.0, e1) * res(model, 1.0, e0)
        with pytest.raises(DomainError, match='rewriting steps'):
            eliminate_fields(expr, max_steps=1)


class TestAutomorphisms:
    def test_translate_substitutes_arguments(self, model, e0):
        moved = translate(res(model, 1.0, e0), np.pi / 2)
        [(_, word)] = moved.terms
        np.testing.assert_allclose(word[0].arg.array, [0.0, 1.0], atol=1e-14)
        assert word[0].lam == 1.0

    def test_translate_zero_is_identity(self, model, e0):
        expr = zeta(model, e0)
        assert translate(expr, 0.0) is expr

    def test_bogoliubov_rejects_non_symplectic(self, model, e0):
        with pytest.raises(DomainError):
            bogoliubov(zeta(model, e0), np.diag([2.0, 1.0]))

    def test_bogoliubov_rotation_keeps_core(self, model, e0):
        rot = np.array([[0.0, -1.0], [1.0, 0.0]])
        image = bogoliubov(zeta(model, e0), rot)
        assert image.core
        assert image.terms[0][1][0].kind == AtomKind.CLIFF


class TestDensityNet:
    def test_replaces_cliffords(self, model, e0):
        net = density_net(cliff(model, e0), 4.0)
        assert net == 1j * cliff(model, e0) * res(model, 1.0, e0 / 4.0)
        assert net.core

    def test_rejects_fields_and_bad_lambda(self, model, e0):
        with pytest.raises(DomainError):
            density_net(field(model, e0), 2.0)
        with pytest.raises(DomainError):
            density_net(cliff(model, e0), 0.0)

    def test_factor_bound(self, model):
        assert net_factor_bound(model, [3.0, 4.0]) == pytest.approx(np.sqrt(12.5))
