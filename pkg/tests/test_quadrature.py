import numpy as np
import pytest

from parahyp.quadrature import (QuadratureRule, exponential_moments,
                                gauss_legendre_1d, gauss_legendre_2d,
                                weighted_gauss_radau)


def reference_integral(f, tau, rho, panels=16, order=40):
    """Brute-force composite Gauss quadrature of f(s) e^{-2 rho s} on [0, tau]."""
    base = gauss_legendre_1d(order)
    total = 0.0
    edges = np.linspace(0.0, tau, panels + 1)
    for a, b in zip(edges[:-1], edges[1:]):
        s = a + (b - a) * base.nodes
        total += (b - a) * np.dot(base.weights, f(s) * np.exp(-2.0 * rho * s))
    return total


class TestGaussLegendre:
    def test_single_point_is_midpoint(self):
        rule = gauss_legendre_1d(1)
        assert rule.nodes == pytest.approx([0.5])
        assert rule.weights == pytest.approx([1.0])

    def test_two_point_nodes(self):
        rule = gauss_legendre_1d(2)
        expected = [(1 - 1 / np.sqrt(3)) / 2, (1 + 1 / np.sqrt(3)) / 2]
        assert rule.nodes == pytest.approx(expected)
        assert rule.weights == pytest.approx([0.5, 0.5])

    def test_two_point_cubic_exactness(self):
        rule = gauss_legendre_1d(2)
        assert np.dot(rule.weights, rule.nodes**3) == pytest.approx(0.25, abs=1e-15)

    def test_exactness_degree(self):
        for k in range(1, 7):
            rule = gauss_legendre_1d(k)
            assert rule.exactness_degree == 2 * k - 1
            for deg in range(rule.exactness_degree + 1):
                exact = 1.0 / (deg + 1)
                assert np.dot(rule.weights, rule.nodes**deg) == pytest.approx(exact, rel=1e-13)

    def test_rejects_zero_points(self):
        with pytest.raises(ValueError):
            gauss_legendre_1d(0)

    def test_tensor_rule_integrates_xy(self):
        rule = gauss_legendre_2d(3)
        val = np.dot(rule.weights, rule.nodes[:, 0] ** 2 * rule.nodes[:, 1] ** 3)
        assert val == pytest.approx(1.0 / 12.0, rel=1e-14)


class TestExponentialMoments:
    def test_rho_zero_monomials(self):
        mu = exponential_moments(0.0, 1.0, 4)
        assert mu == pytest.approx([1, 1 / 2, 1 / 3, 1 / 4, 1 / 5])

    def test_closed_form_k0(self):
        mu = exponential_moments(1.0, 1.0, 0)
        assert mu[0] == pytest.approx((1 - np.exp(-2.0)) / 2.0, rel=1e-15)

    def test_recurrence_k1(self):
        # closed form: mu_1 = (mu_0 - e^{-2}) / 2 = 0.14849853...
        mu = exponential_moments(1.0, 1.0, 1)
        assert mu[1] == pytest.approx((mu[0] - np.exp(-2.0)) / 2.0, rel=1e-14)
        assert mu[1] == pytest.approx(0.1484985376, abs=5e-11)

    @pytest.mark.parametrize("rho", [0.0, 1e-3, 0.37, 1.0, 5.0])
    @pytest.mark.parametrize("tau", [1.0 / 64, 0.25, 1.0])
    def test_against_reference_quadrature(self, rho, tau):
        mu = exponential_moments(rho, tau, 8)
        for k in range(9):
            ref = reference_integral(lambda s, k=k: s**k, tau, rho)
            assert mu[k] == pytest.approx(ref, rel=5e-12)

    def test_input_validation(self):
        with pytest.raises(ValueError):
            exponential_moments(1.0, 0.0, 3)
        with pytest.raises(ValueError):
            exponential_moments(-1.0, 1.0, 3)
        with pytest.raises(ValueError):
            exponential_moments(1.0, 1.0, -1)


class TestWeightedGaussRadau:
    def test_q0_closed_form(self):
        for rho in (0.5, 1.0, 3.0):
            rule = weighted_gauss_radau(0, rho, 0.75)
            assert rule.nodes == pytest.approx([0.75])
            expected = (1 - np.exp(-2 * rho * 0.75)) / (2 * rho)
            assert rule.weights == pytest.approx([expected], rel=1e-14)

    def test_classical_right_radau(self):
        rule = weighted_gauss_radau(1, 0.0, 1.0)
        assert rule.nodes == pytest.approx([1 / 3, 1], abs=1e-14)
        assert rule.weights == pytest.approx([3 / 4, 1 / 4], abs=1e-14)

    def test_weighted_rule_against_reference(self):
        rule = weighted_gauss_radau(2, 1.0, 0.5)
        val = np.dot(rule.weights, rule.nodes**4)
        ref = reference_integral(lambda s: s**4, 0.5, 1.0)
        assert val == pytest.approx(ref, rel=1e-13)

    @pytest.mark.parametrize("q", [0, 1, 2, 3, 4])
    @pytest.mark.parametrize("rho", [0.0, 1.0, 5.0])
    def test_moment_exactness(self, q, rho):
        for tau in (1.0 / 64, 0.3, 1.0):
            rule = weighted_gauss_radau(q, rho, tau)
            mu = exponential_moments(rho, tau, 2 * q)
            for k in range(2 * q + 1):
                got = np.dot(rule.weights, rule.nodes**k)
                assert got == pytest.approx(mu[k], rel=1e-12)

    def test_random_polynomial_exactness(self):
        rng = np.random.default_rng(42)
        for q in (1, 2, 3):
            rule = weighted_gauss_radau(q, 2.0, 0.7)
            mu = exponential_moments(2.0, 0.7, 2 * q)
            for _ in range(5):
                c = rng.standard_normal(2 * q + 1)
                exact = np.dot(c, mu)
                got = np.dot(rule.weights, np.polynomial.polynomial.polyval(rule.nodes, c))
                assert got == pytest.approx(exact, rel=1e-12, abs=1e-14)

    def test_right_endpoint_is_node(self):
        for q in range(4):
            for tau in (1.0 / 64, 1.0):
                rule = weighted_gauss_radau(q, 1.5, tau)
                assert abs(rule.nodes[-1] - tau) <= 1e-14 * tau

    def test_weights_positive(self):
        for q in range(5):
            for rho_tau in (0.1, 1.0, 10.0):
                rule = weighted_gauss_radau(q, rho_tau, 1.0)
                assert np.all(rule.weights > 0)

    def test_rho_to_zero_limit(self):
        classical = weighted_gauss_radau(2, 0.0, 1.0)
        nearly = weighted_gauss_radau(2, 1e-10, 1.0)
        assert np.max(np.abs(classical.nodes - nearly.nodes)) <= 1e-8
        assert np.max(np.abs(classical.weights - nearly.weights)) <= 1e-8

    def test_input_validation(self):
        with pytest.raises(ValueError):
            weighted_gauss_radau(-1, 1.0, 1.0)
        with pytest.raises(ValueError):
            weighted_gauss_radau(1, -1.0, 1.0)
        with pytest.raises(ValueError):
            weighted_gauss_radau(1, 1.0, -0.5)


def test_rule_rejects_nonpositive_weights():
    with pytest.raises(ValueError):
        QuadratureRule(nodes=np.array([0.5]), weights=np.array([-1.0]),
                       exactness_degree=1)
