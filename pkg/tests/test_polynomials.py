import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from classicality.phase_space import (CanonicalVariable, PhaseSpace, PolynomialObservable,
                                      poisson_bracket)


def P(n, terms):
    return PolynomialObservable(n, terms)


class TestPolynomialObservable:
    def test_constructor_merges_and_drops_zeros(self):
        poly = P(2, {(1, 0): 2.0, (0, 0): 0.0})
        assert poly.terms == {(1, 0): 2.0}

    def test_arithmetic(self):
        q = PolynomialObservable.variable(2, 0)
        p = PolynomialObservable.variable(2, 1)
        h = (q ** 2 + p ** 2) * 0.5
        assert h.terms == {(2, 0): 0.5, (0, 2): 0.5}
        assert (h - h).is_zero()
        assert (q * p).terms == {(1, 1): 1.0}
        assert (2.0 * q - q - q).is_zero()

    def test_diff(self):
        poly = P(2, {(3, 1): 2.0})  # 2 q^3 p
        assert poly.diff(0).terms == {(2, 1): 6.0}
        assert poly.diff(1).terms == {(3, 0): 2.0}
        assert poly.diff_multi((3, 1)).terms == {(0, 0): 12.0}
        assert poly.diff_multi((4, 0)).is_zero()

    def test_evaluate_scalar_and_vectorized(self):
        poly = P(2, {(2, 0): 1.0, (0, 1): -3.0, (0, 0): 5.0})
        assert poly.evaluate([2.0, 1.0]) == pytest.approx(4.0 - 3.0 + 5.0)
        qs = np.array([0.0, 1.0, 2.0])
        ps = np.array([1.0, 1.0, 1.0])
        np.testing.assert_allclose(poly.evaluate([qs, ps]), [2.0, 3.0, 6.0])

    def test_degree_and_max_exponents(self):
        poly = P(4, {(1, 0, 2, 0): 1.0, (0, 3, 0, 0): 1.0})
        assert poly.degree() == 3
        assert poly.max_exponents() == (1, 3, 2, 0)

    def test_normalized_drops_dust(self):
        poly = P(2, {(1, 0): 1.0, (0, 1): 1e-15})
        assert poly.normalized().terms == {(1, 0): 1.0}

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            P(2, {(1, 0): 1.0}) + P(4, {(1, 0, 0, 0): 1.0})
        with pytest.raises(ValueError):
            poisson_bracket(P(2, {(1, 0): 1.0}), P(4, {(1, 0, 0, 0): 1.0}))

    def test_odd_variable_count_rejected(self):
        with pytest.raises(ValueError):
            PolynomialObservable(3)


class TestPoissonBracket:
    def test_canonical_pair(self):
        q = PolynomialObservable.variable(2, 0)
        p = PolynomialObservable.variable(2, 1)
        assert poisson_bracket(q, p).terms == {(0, 0): 1.0}

    def test_against_harmonic_hamiltonian(self):
        q = PolynomialObservable.variable(2, 0)
        p = PolynomialObservable.variable(2, 1)
        h = (q ** 2 + p ** 2) * 0.5
        assert poisson_bracket(q, h) == p

    def test_four_variable_hand_derivative(self):
        # variables (q, Q, p, P); g = k Q p^2, hand oracle: {q, g} = dg/dp = 2 k Q p
        k = 0.7
        q = PolynomialObservable.variable(4, 0)
        g = P(4, {(0, 1, 2, 0): k})
        expected = P(4, {(0, 1, 1, 0): 2.0 * k})
        assert poisson_bracket(q, g) == expected


# Integer coefficients keep every float operation exact, so the algebraic
# identities can be asserted as structural equality.
_coeffs = st.integers(min_value=-4, max_value=4)
_exps = st.tuples(*([st.integers(min_value=0, max_value=2)] * 4))
_polys = st.dictionaries(_exps, _coeffs, min_size=1, max_size=3).map(
    lambda terms: PolynomialObservable(4, terms))


@settings(max_examples=60, deadline=None, derandomize=True)
@given(_polys, _polys)
def test_bracket_antisymmetry(f, g):
    assert poisson_bracket(f, g) == -poisson_bracket(g, f)


@settings(max_examples=60, deadline=None, derandomize=True)
@given(_polys, _polys, _polys)
def test_bracket_leibniz_rule(f, g, h):
    lhs = poisson_bracket(f * g, h)
    rhs = f * poisson_bracket(g, h) + poisson_bracket(f, h) * g
    assert lhs == rhs


class TestPhaseSpace:
    def test_labels_and_pairing(self):
        space = PhaseSpace(["q", "Q"])
        assert space.labels() == ("q", "Q", "p", "P")
        assert space.conjugate(0).label == "p"
        assert space.conjugate(3).label == "Q"
        assert space.by_label("P").index == 3
        assert [v.kind for v in space] == ["position"] * 2 + ["momentum"] * 2

    def test_unknown_label(self):
        with pytest.raises(KeyError):
            PhaseSpace(["q"]).by_label("z")

    def test_variable_validation(self):
        with pytest.raises(ValueError):
            CanonicalVariable(0, "weird", "q")
