"""Tests for test-function spaces, forms, flows and Darboux frames."""

import math

import numpy as np
import pytest
from numpy.polynomial import hermite

from core.errors import DegenerateFormError, ModelError
from core.space_model import (
    TestFunction,
    build_canonical_pairs,
    build_custom,
    build_lightray_hermite,
    darboux_basis,
    flow,
    is_symplectic,
    model_from_dict,
    model_residuals,
    model_to_dict,
    prime,
    sigma,
    tau,
    ttdiff_errors,
)


def _hermite_pairing(m: int, n: int) -> float:
    """∫ h_m h_n′ dx by Gauss–Hermite quadrature on the normalized Hermite functions."""
    x, w = hermite.hermgauss(60)
    c_m = 1.0 / math.sqrt(2**m * math.factorial(m) * math.sqrt(math.pi))
    c_n = 1.0 / math.sqrt(2**n * math.factorial(n) * math.sqrt(math.pi))
    e_m = np.eye(m + 1)[m]
    e_n = np.eye(n + 1)[n]
    h_m = hermite.hermval(x, e_m)
    dh_n = hermite.hermval(x, hermite.hermder(e_n)) - x * hermite.hermval(x, e_n)
    return float(np.sum(w * c_m * c_n * h_m * dh_n))


class TestTestFunction:
    """Arithmetic on coordinate vectors."""

    def test_arithmetic(self):
        f = TestFunction.from_array([1.0, 2.0])
        g = TestFunction.from_array([0.5, -1.0])
        assert (f + g).coeffs == (1.5, 1.0)
        assert (f - g).coeffs == (0.5, 3.0)
        assert (-f).coeffs == (-1.0, -2.0)
        assert (2 * f).coeffs == (2.0, 4.0)
        assert (f / 2).coeffs == (0.5, 1.0)

    def test_parallel_factor(self):
        f = TestFunction.from_array([1.0, 2.0])
        assert f.parallel_factor(TestFunction.from_array([-3.0, -6.0])) == pytest.approx(-3.0)
        assert f.parallel_factor(TestFunction.from_array([1.0, 0.0])) is None
        assert TestFunction.from_array([0.0, 0.0]).parallel_factor(f) is None

    def test_hashable_and_equal_by_value(self):
        assert TestFunction.from_array([1, 0]) == TestFunction.from_array([1.0, 0.0])
        assert len({TestFunction.from_array([1, 0]), TestFunction.from_array([1.0, 0.0])}) == 1


class TestCanonicalPairs:
    """The exact canonical model."""

    def test_sigma_of_basis_pair(self, canonical_model):
        e0, e1 = canonical_model.basis(0), canonical_model.basis(1)
        assert sigma(canonical_model, e0, e1) == pytest.approx(1.0)
        assert sigma(canonical_model, e1, e0) == pytest.approx(-1.0)
        assert tau(canonical_model, e0, e0) == pytest.approx(1.0)

    def test_prime_rotates(self, canonical_model):
        e0, e1 = canonical_model.basis(0), canonical_model.basis(1)
        assert prime(canonical_model, e0).coeffs == pytest.approx((0.0, -1.0))
        assert prime(canonical_model, e1).coeffs == pytest.approx((1.0, 0.0))

    def test_flow_is_rotation(self, canonical_model):
        t = 0.37
        moved = flow(canonical_model, t, canonical_model.basis(0))
        assert moved.coeffs == pytest.approx((math.cos(t), math.sin(t)), abs=1e-14)

    def test_flow_preserves_both_forms(self, canonical_model):
        residuals = model_residuals(canonical_model, t=1.3)
        assert max(residuals.values()) < 1e-12

    def test_darboux_frame_is_identity(self, canonical_model):
        frame = darboux_basis(canonical_model)
        np.testing.assert_allclose(frame.B, np.eye(2), atol=1e-15)
        assert frame.residual(canonical_model) < 1e-14

    def test_rejects_zero_pairs(self):
        with pytest.raises(ModelError):
            build_canonical_pairs(0)

    def test_wrong_length_function(self, canonical_model):
        with pytest.raises(ModelError):
            sigma(canonical_model, [1.0, 0.0, 0.0], [0.0, 1.0])


class TestLightrayHermite:
    """Hermite truncation of σ(f, g) = ∫ f g′."""

    @pytest.mark.parametrize('m,n', [(0, 1), (1, 0), (1, 2), (2, 3), (0, 3), (3, 3)])
    def test_sigma_matches_quadrature(self, m, n):
        model = build_lightray_hermite(4)
        assert sigma(model, model.basis(m), model.basis(n)) == pytest.approx(_hermite_pairing(m, n), abs=1e-12)

    def test_odd_dimension_is_degenerate(self):
        with pytest.raises(DegenerateFormError) as exc:
            build_lightray_hermite(5)
        assert exc.value.subspace == [0, 1, 2, 3, 4]

    def test_darboux_frame(self, hermite_model):
        frame = darboux_basis(hermite_model)
        assert frame.residual(hermite_model) < 1e-12
        alpha, beta = frame.coordinates(hermite_model.basis(0))
        np.testing.assert_allclose(alpha, [1.0, 0.0], atol=1e-14)
        np.testing.assert_allclose(beta, [0.0, 0.0], atol=1e-14)

    def test_flow_is_symplectic(self, hermite_model):
        assert is_symplectic(hermite_model, hermite_model.flow_matrix(0.8))

    def test_difference_quotient_order_one(self, hermite_model):
        result = ttdiff_errors(hermite_model, hermite_model.basis(1), hermite_model.basis(2))
        assert result['order'] == pytest.approx(1.0, abs=0.05)
        assert result['errors'][-1] < 1e-3


class TestCustomModel:
    """Validation of explicit (τ, S) pairs."""

    def test_accepts_scaled_canonical(self):
        model = build_custom([[2.0, 0.0], [0.0, 2.0]], [[0.0, -1.0], [1.0, 0.0]])
        assert sigma(model, model.basis(0), model.basis(1)) == pytest.approx(2.0)
        assert darboux_basis(model).residual(model) < 1e-14

    def test_rejects_asymmetric_tau(self):
        with pytest.raises(ModelError, match='symmetric'):
            build_custom([[1.0, 0.5], [0.0, 1.0]], [[0.0, -1.0], [1.0, 0.0]])

    def test_rejects_indefinite_tau(self):
        with pytest.raises(ModelError, match='positive definite'):
            build_custom([[1.0, 0.0], [0.0, -1.0]], [[0.0, -1.0], [1.0, 0.0]])

    def test_rejects_non_antisymmetric_generator(self):
        with pytest.raises(ModelError, match='antisymmetric'):
            build_custom(np.eye(2), [[1.0, 0.0], [0.0, 1.0]])

    def test_singular_generator_is_degenerate(self):
        s = np.zeros((4, 4))
        s[0, 1], s[1, 0] = -1.0, 1.0
        with pytest.raises(DegenerateFormError):
            build_custom(np.eye(4), s)

    def test_odd_dimension_is_degenerate(self):
        with pytest.raises(DegenerateFormError):
            build_custom(np.eye(3), np.zeros((3, 3)))


class TestSerialization:
    def test_round_trip_preserves_matrices(self):
        original = build_custom([[2.0, 0.0], [0.0, 2.0]], [[0.0, -1.0], [1.0, 0.0]])
        rebuilt = model_from_dict(model_to_dict(original))
        np.testing.assert_array_equal(rebuilt.tau_matrix, original.tau_matrix)
        np.testing.assert_array_equal(rebuilt.S, original.S)

    def test_unknown_flavor(self):
        with pytest.raises(ModelError, match='Unknown model flavor'):
            model_from_dict({'flavor': 'weyl', 'N': 2})
