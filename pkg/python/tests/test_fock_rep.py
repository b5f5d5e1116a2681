"""Tests for the truncated Fock representation."""

import numpy as np
import pytest
import scipy.sparse
from numpy.polynomial import hermite
from scipy.special import wofz

from config.config import RepConfig
from core.errors import DimensionBudgetError, DomainError, ModelError
from core.fock_rep import (
    build_rep,
    coherent_vector,
    domain_vectors,
    embed_vector,
    equality_residual,
    evaluate,
    export_operator,
    expression_norm,
    majorana_generators,
    op_cliff,
    op_field,
    op_resolvent,
    operator_summary,
    random_safe_vectors,
    safe_project,
    state_expectation,
    strong_apply,
    vacuum,
)
from core.graded_algebra import cliff, field, res, unit, zeta
from core.space_model import build_canonical_pairs, sigma


def _safe(rep, rng, count=3, margin=2):
    return random_safe_vectors(rep, count, rng, margin=margin)


class TestConstruction:
    """Dimensions, budget and the generators."""

    def test_dimensions(self, canonical_rep, hermite_rep):
        assert canonical_rep.fermion_dim == 2
        assert canonical_rep.boson_dim == 16
        assert canonical_rep.dim == 32
        assert hermite_rep.dim == 4 * 144

    def test_budget_is_checked_before_allocation(self, hermite_model):
        with pytest.raises(DimensionBudgetError) as exc:
            build_rep(hermite_model, RepConfig(boson_cutoff=40, dimension_budget=1000))
        assert exc.value.dimension == 4 * 1600
        assert exc.value.budget == 1000

    def test_majoranas_anticommute(self):
        gens = majorana_generators(2)
        for a, ga in enumerate(gens):
            for b, gb in enumerate(gens):
                expected = np.eye(4) if a == b else np.zeros((4, 4))
                np.testing.assert_allclose(ga @ gb + gb @ ga, expected, atol=1e-15)

    def test_cliff_anticommutator_is_tau(self, hermite_rep, hermite_names):
        f, g = hermite_names['f1'], hermite_names['f2'] + hermite_names['f1']
        cf, cg = hermite_rep.fermion_cliff(f), hermite_rep.fermion_cliff(g)
        tau_fg = float(f.array @ hermite_rep.model.tau_matrix @ g.array)
        np.testing.assert_allclose(cf @ cg + cg @ cf, tau_fg * np.eye(4), atol=1e-14)

    def test_field_is_hermitian(self, hermite_rep, hermite_names):
        summary = operator_summary(op_field(hermite_rep, hermite_names['f2']))
        assert summary['hermiticity_residual'] == 0.0

    def test_boson_field_is_sparse(self, hermite_rep, hermite_names):
        jf = hermite_rep.boson_field(hermite_names['f1'])
        assert scipy.sparse.issparse(jf)
        # two modes, each tridiagonal
        assert jf.nnz <= 5 * hermite_rep.boson_dim
        dense = jf.toarray()
        np.testing.assert_allclose(dense, dense.conj().T, atol=1e-15)

    def test_resolvent_inverts_shifted_field(self, canonical_rep, canonical_model):
        f = canonical_model.coords([0.6, -0.8])
        shifted = 2j * np.eye(canonical_rep.dim) - op_field(canonical_rep, f)
        np.testing.assert_allclose(op_resolvent(canonical_rep, 2.0, f) @ shifted, np.eye(32), atol=1e-12)

    def test_resolvent_of_zero_function(self, canonical_rep):
        np.testing.assert_allclose(op_resolvent(canonical_rep, 4.0, [0.0, 0.0]), -0.25j * np.eye(32))

    def test_zero_lambda_rejected(self, canonical_rep, canonical_model):
        with pytest.raises(DomainError):
            op_resolvent(canonical_rep, 0.0, canonical_model.basis(0))


class TestCommutationRelations:
    """CCR on the safe subspace, fermion/boson commutativity everywhere."""

    def test_ccr_canonical(self, canonical_rep, canonical_model, rng):
        q, p = op_field(canonical_rep, canonical_model.basis(0)), op_field(canonical_rep, canonical_model.basis(1))
        for v in _safe(canonical_rep, rng):
            np.testing.assert_allclose((q @ p - p @ q) @ v, 1j * v, atol=1e-12)

    def test_ccr_hermite(self, hermite_rep, hermite_model, rng):
        f, g = hermite_model.basis(0), hermite_model.basis(1)
        jf, jg = op_field(hermite_rep, f), op_field(hermite_rep, g)
        s = sigma(hermite_model, f, g)
        assert s == pytest.approx(np.sqrt(0.5))
        for v in _safe(hermite_rep, rng):
            np.testing.assert_allclose((jf @ jg - jg @ jf) @ v, 1j * s * v, atol=1e-12)

    def test_ccr_fails_at_top_level(self, canonical_rep, canonical_model):
        q, p = op_field(canonical_rep, canonical_model.basis(0)), op_field(canonical_rep, canonical_model.basis(1))
        top = np.zeros(32, dtype=complex)
        top[15] = 1.0
        assert np.linalg.norm((q @ p - p @ q) @ top - 1j * top) > 1.0

    def test_fermions_commute_with_bosons(self, hermite_rep, hermite_names):
        c = op_cliff(hermite_rep, hermite_names['f1'])
        r = op_resolvent(hermite_rep, 1.0, hermite_names['f2'])
        np.testing.assert_allclose(c @ r, r @ c, atol=1e-14)


class TestApplication:
    """strong_apply against dense evaluation."""

    def test_strong_apply_matches_evaluate(self, hermite_rep, hermite_names, rng):
        f1, f2 = hermite_names['f1'], hermite_names['f2']
        model = hermite_rep.model
        expr = 2 * zeta(model, f1) * res(model, -2.0, f2) + 1j * cliff(model, f2) * field(model, f1) - unit(model)
        v = rng.standard_normal(hermite_rep.dim) + 1j * rng.standard_normal(hermite_rep.dim)
        np.testing.assert_allclose(strong_apply(hermite_rep, expr, v), evaluate(hermite_rep, expr) @ v, atol=1e-12)

    def test_grouped_terms_share_boson_word(self, canonical_rep, canonical_model, rng):
        e0, e1 = canonical_model.basis(0), canonical_model.basis(1)
        r = res(canonical_model, 1.0, e1)
        expr = cliff(canonical_model, e0) * r + cliff(canonical_model, e1) * r
        v = rng.standard_normal(32) + 0j
        expected = evaluate(canonical_rep, cliff(canonical_model, e0 + e1) * r) @ v
        np.testing.assert_allclose(strong_apply(canonical_rep, expr, v), expected, atol=1e-13)

    def test_model_mismatch(self, canonical_rep):
        other = build_canonical_pairs(1)
        with pytest.raises(ModelError):
            strong_apply(canonical_rep, unit(other), vacuum(canonical_rep))

    def test_vector_shape_mismatch(self, canonical_rep, canonical_model):
        with pytest.raises(ModelError):
            strong_apply(canonical_rep, unit(canonical_model), np.ones(5))

    def test_equality_residual(self, canonical_rep, canonical_model, rng):
        f = canonical_model.basis(0)
        a = field(canonical_model, f) * res(canonical_model, 3.0, f)
        b = 3j * res(canonical_model, 3.0, f) - 1
        vectors = [rng.standard_normal(32) + 0j for _ in range(3)]
        assert equality_residual(canonical_rep, a, b, vectors) < 1e-12


class TestNorms:
    def test_resolvent_norm_law(self, canonical_rep, odd_rep, canonical_model):
        f = canonical_model.coords([0.6, 0.8])
        even = expression_norm(canonical_rep, res(canonical_model, 2.0, f))
        odd = expression_norm(odd_rep, res(canonical_model, 2.0, f))
        assert even < 0.5
        assert odd == pytest.approx(0.5, abs=1e-12)

    def test_multi_term_norm(self, canonical_rep, canonical_model):
        c0 = cliff(canonical_model, canonical_model.basis(0))
        c1 = cliff(canonical_model, canonical_model.basis(1))
        # (c0 + c1)² = τ(f, f)/2 = 1
        assert expression_norm(canonical_rep, c0 + c1) == pytest.approx(1.0)
        assert expression_norm(canonical_rep, c0 - c0) == 0.0


class TestVectorsAndStates:
    def test_vacuum_expectations(self, canonical_rep, canonical_model):
        e0 = canonical_model.basis(0)
        assert state_expectation(canonical_rep, unit(canonical_model)) == pytest.approx(1.0)
        assert state_expectation(canonical_rep, field(canonical_model, e0)) == pytest.approx(0.0)
        jj = field(canonical_model, e0) * field(canonical_model, e0)
        assert state_expectation(canonical_rep, jj) == pytest.approx(0.5)

    def test_resolvent_expectation_is_gauss_hermite_rule(self, odd_rep, canonical_model):
        # the truncated q has the Hermite nodes as eigenvalues, weighted w_k/√π in the vacuum
        x, w = hermite.hermgauss(31)
        expected = np.sum(w / (1j - x)) / np.sqrt(np.pi)
        value = state_expectation(odd_rep, res(canonical_model, 1.0, canonical_model.basis(0)))
        assert value == pytest.approx(expected, abs=1e-10)

    def test_resolvent_expectation_faddeeva(self, odd_rep, canonical_model):
        # ∫ (i − x)⁻¹ e^{−x²}/√π dx = −i√π·w(i)
        exact = -1j * np.sqrt(np.pi) * wofz(1j).real
        value = state_expectation(odd_rep, res(canonical_model, 1.0, canonical_model.basis(0)))
        assert abs(value - exact) < 1e-5

    def test_safe_project(self, canonical_rep):
        v = np.ones(32, dtype=complex)
        projected = safe_project(canonical_rep, v, margin=2).reshape(2, 16)
        assert np.all(projected[:, :15] == 1.0)
        assert np.all(projected[:, 15] == 0.0)
        with pytest.raises(DomainError):
            safe_project(canonical_rep, v, margin=16)

    def test_random_safe_vectors_live_on_safe_subspace(self, hermite_rep, rng):
        mask = hermite_rep.safe_mask(3)
        for v in random_safe_vectors(hermite_rep, 4, rng, margin=3):
            assert np.linalg.norm(v) == pytest.approx(1.0)
            assert np.all(v.reshape(hermite_rep.fermion_dim, -1)[:, ~mask] == 0.0)

    def test_domain_vectors(self, canonical_rep, canonical_model):
        e0, e1 = canonical_model.basis(0), canonical_model.basis(1)
        vectors = domain_vectors(canonical_rep, [cliff(canonical_model, e0), field(canonical_model, [0.0, 0.0])])
        assert len(vectors) == 2
        np.testing.assert_array_equal(vectors[0], vacuum(canonical_rep))
        assert all(np.linalg.norm(v) == pytest.approx(1.0) for v in vectors)
        more = domain_vectors(canonical_rep, [zeta(canonical_model, e1), field(canonical_model, e0)])
        assert len(more) == 3

    def test_coherent_vector_displaces_field(self, canonical_rep, canonical_model):
        f = canonical_model.coords([0.3, 0.0])
        g = canonical_model.basis(1)
        v = coherent_vector(canonical_rep, f)
        assert np.linalg.norm(v) == pytest.approx(1.0)
        value = state_expectation(canonical_rep, field(canonical_model, g), v)
        assert value == pytest.approx(sigma(canonical_model, f, g), abs=1e-8)

    def test_embed_vector(self, canonical_rep):
        big = canonical_rep.doubled()
        assert big is not None and big.cutoff == 32
        v = np.arange(32, dtype=complex)
        embedded = embed_vector(v, canonical_rep, big).reshape(2, 32)
        np.testing.assert_array_equal(embedded[:, :16], v.reshape(2, 16))
        assert np.all(embedded[:, 16:] == 0.0)

    def test_doubled_over_budget_is_none(self, hermite_model):
        rep = build_rep(hermite_model, RepConfig(boson_cutoff=12, reference_budget=1000))
        assert rep.doubled() is None

    def test_doubled_ignores_dimension_budget(self, canonical_model):
        rep = build_rep(canonical_model, RepConfig(boson_cutoff=16, dimension_budget=32, reference_budget=64))
        big = rep.doubled()
        assert big is not None and big.dim == 64
        assert big.doubled() is None


class TestExport:
    def test_export_operator(self, canonical_rep, canonical_model, tmp_path):
        op = op_field(canonical_rep, canonical_model.basis(0))
        path = export_operator(op, tmp_path / 'ops' / 'q.npz')
        with np.load(path) as data:
            np.testing.assert_array_equal(data['matrix'], op)
            assert int(data['dimension']) == 32
            assert float(data['hermiticity_residual']) == 0.0
