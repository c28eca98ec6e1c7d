"""Detection function families, adjustments, and bin probabilities.

scipy.integrate.quad serves as the independent integration oracle here;
the engine itself never calls it.
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as scipy_integrate

from ctdskit.ctds.detection_function import (
    DetectionFunctionSpec,
    DetectionModel,
    Key,
    bin_probabilities,
    estimate_P,
    g,
    g_values,
    half_normal_model,
    hazard_rate_model,
    is_feasible,
    uniform_model,
)
from ctdskit.ctds.quadrature import integrate, integrate_bins
from ctdskit.errors import InfeasibleModelError

W = 15.0


def quad_oracle(fn, a, b):
    val, _ = scipy_integrate.quad(fn, a, b, epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def random_feasible_model(rng):
    """Draw until the feasibility screen passes; small coefficients pass often."""
    while True:
        kind = rng.integers(0, 6)
        orders = ((), (1,), (2,), (1, 2))[rng.integers(0, 4)]
        adj = tuple(rng.uniform(-0.25, 0.25) for _ in orders)
        if kind in (0, 1):
            m = DetectionModel(
                spec=DetectionFunctionSpec(key=Key.UNIFORM, cosine_adjustment_orders=orders),
                adjustments=adj,
            )
        elif kind in (2, 3):
            m = half_normal_model(float(rng.uniform(2.0, 20.0)), adj, orders)
        else:
            m = hazard_rate_model(
                float(rng.uniform(2.0, 20.0)), float(rng.uniform(1.0, 6.0)), adj, orders
            )
        if is_feasible(m, W):
            return m


class TestKeyShapes:
    def test_uniform_is_one_everywhere(self):
        r = np.linspace(0.0, W, 50)
        assert np.all(g(r, uniform_model(), W) == 1.0)

    def test_half_normal_closed_form(self):
        m = half_normal_model(sigma=5.0)
        r = np.array([0.0, 2.0, 5.0, 10.0, 15.0])
        expected = np.exp(-(r**2) / 50.0)
        np.testing.assert_allclose(g(r, m, W), expected, rtol=1e-15)

    def test_hazard_rate_point_values(self):
        m = hazard_rate_model(sigma=4.0, b=2.0)
        assert g(4.0, m, W) == pytest.approx(1.0 - math.exp(-1.0))
        assert g(8.0, m, W) == pytest.approx(1.0 - math.exp(-0.25))

    def test_hazard_rate_limit_at_zero(self):
        m = hazard_rate_model(sigma=4.0, b=2.0)
        assert g(0.0, m, W) == 1.0

    def test_g0_is_one_for_all_keys(self):
        for m in (uniform_model(), half_normal_model(5.0), hazard_rate_model(5.0, 2.5)):
            assert g(0.0, m, W) == pytest.approx(1.0, abs=1e-15)

    def test_monotone_decrease_without_adjustments(self):
        r = np.linspace(0.0, W, 200)
        for m in (half_normal_model(4.0), hazard_rate_model(6.0, 3.0)):
            vals = g(r, m, W)
            assert np.all(np.diff(vals) <= 1e-12)


class TestAdjustments:
    def test_rescale_keeps_g0_at_one(self):
        m = half_normal_model(6.0, adjustments=(0.2,), orders=(2,))
        assert g(0.0, m, W) == pytest.approx(1.0, abs=1e-14)

    def test_series_formula(self):
        # key * (1 + a*cos(2 pi r / w)) / (1 + a), written out by hand
        a = 0.15
        m = half_normal_model(6.0, adjustments=(a,), orders=(2,))
        r = 4.7
        expected = (
            math.exp(-(r**2) / 72.0)
            * (1.0 + a * math.cos(2.0 * math.pi * r / W))
            / (1.0 + a)
        )
        assert g(r, m, W) == pytest.approx(expected, rel=1e-14)

    def test_two_term_series(self):
        a1, a2 = 0.1, -0.05
        m = half_normal_model(6.0, adjustments=(a1, a2), orders=(1, 2))
        r = 9.0
        expected = (
            math.exp(-(r**2) / 72.0)
            * (
                1.0
                + a1 * math.cos(math.pi * r / W)
                + a2 * math.cos(2.0 * math.pi * r / W)
            )
            / (1.0 + a1 + a2)
        )
        assert g(r, m, W) == pytest.approx(expected, rel=1e-14)

    def test_duplicate_orders_rejected(self):
        with pytest.raises(ValueError):
            DetectionFunctionSpec(key=Key.HALF_NORMAL, cosine_adjustment_orders=(2, 2))

    def test_coefficient_count_must_match(self):
        with pytest.raises(ValueError):
            half_normal_model(5.0, adjustments=(0.1, 0.2), orders=(2,))

    def test_q_counts_parameters(self):
        assert DetectionFunctionSpec(key=Key.UNIFORM).q == 0
        assert DetectionFunctionSpec(key=Key.HALF_NORMAL).q == 1
        assert DetectionFunctionSpec(key=Key.HAZARD_RATE).q == 2
        assert (
            DetectionFunctionSpec(
                key=Key.HAZARD_RATE, cosine_adjustment_orders=(1, 2)
            ).q
            == 4
        )


class TestFeasibility:
    def test_plain_keys_always_feasible(self):
        assert is_feasible(uniform_model(), W)
        assert is_feasible(half_normal_model(0.5), W)
        assert is_feasible(hazard_rate_model(30.0, 1.5), W)

    def test_large_negative_coefficient_infeasible(self):
        m = half_normal_model(8.0, adjustments=(-1.2,), orders=(1,))
        assert not is_feasible(m, W)
        with pytest.raises(InfeasibleModelError):
            g(1.0, m, W)

    def test_series_nonpositive_at_zero_infeasible(self):
        m = DetectionModel(
            spec=DetectionFunctionSpec(key=Key.UNIFORM, cosine_adjustment_orders=(1,)),
            adjustments=(-1.0,),
        )
        assert not is_feasible(m, W)

    def test_values_above_one_infeasible(self):
        # negative order-1 coefficient: the series grows toward r = w, and
        # the g(0) = 1 rescale pushes the far end above 1
        m = DetectionModel(
            spec=DetectionFunctionSpec(key=Key.UNIFORM, cosine_adjustment_orders=(1,)),
            adjustments=(-0.5,),
        )
        vals = g_values(np.linspace(0, W, 100), m, W)
        assert vals.max() == pytest.approx(3.0)
        assert vals.min() >= 0.0  # infeasible purely by the upper bound
        assert not is_feasible(m, W)

    def test_infeasible_never_clipped(self):
        m = half_normal_model(8.0, adjustments=(-1.2,), orders=(1,))
        vals = g_values(np.linspace(0, W, 100), m, W)
        assert vals.min() < -1e-9  # raw values keep their sign


class TestQuadrature:
    def test_polynomial_exact(self):
        # GK15 integrates low-degree polynomials to machine precision
        val = integrate(lambda r: 3.0 * r**2, 0.0, 2.0)
        assert val == pytest.approx(8.0, rel=1e-14)

    def test_matches_scipy_on_oscillatory_integrand(self):
        fn = lambda r: 2.0 * r * (1.0 + 0.3 * np.cos(5.0 * r)) * np.exp(-r / 4.0)
        assert integrate(fn, 0.0, W, tol=1e-10) == pytest.approx(
            quad_oracle(fn, 0.0, W), abs=1e-9
        )

    def test_bins_sum_to_whole_interval(self):
        edges = np.array([0.0, 1.0, 3.0, 7.0, 15.0])
        fn = lambda r: 2.0 * r * np.exp(-(r**2) / 18.0)
        per_bin = integrate_bins(fn, edges, tol=1e-10)
        assert per_bin.sum() == pytest.approx(integrate(fn, 0.0, 15.0), rel=1e-10)
        for a, b, got in zip(edges[:-1], edges[1:], per_bin):
            assert got == pytest.approx(quad_oracle(fn, a, b), abs=1e-9)


class TestBinProbabilities:
    def test_uniform_key_gives_area_fractions(self):
        edges = np.array([0.0, 7.5, 15.0])
        pi = bin_probabilities(uniform_model(), edges, W)
        np.testing.assert_allclose(pi, [0.25, 0.75], rtol=1e-12)
        assert pi.sum() == pytest.approx(1.0, abs=1e-14)

    def test_half_normal_closed_form_bins(self):
        # int 2 r exp(-r^2/(2 s^2)) dr = 2 s^2 (exp(-a^2/(2s^2)) - exp(-b^2/(2s^2)))
        sigma = 5.0
        edges = np.array([0.0, 3.0, 6.0, 10.0, 15.0])
        s2 = 2.0 * sigma**2
        raw = [
            s2 / 2 * 2 * (math.exp(-(a**2) / s2) - math.exp(-(b**2) / s2))
            for a, b in zip(edges[:-1], edges[1:])
        ]
        expected = np.asarray(raw) / sum(raw)
        pi = bin_probabilities(half_normal_model(sigma), edges, W)
        np.testing.assert_allclose(pi, expected, rtol=1e-10)

    def test_left_truncated_edges_still_normalize(self):
        edges = np.array([2.0, 5.0, 9.0, 15.0])
        pi = bin_probabilities(half_normal_model(6.0), edges, W)
        assert pi.sum() == pytest.approx(1.0, abs=1e-13)
        assert np.all(pi > 0)

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 2**31 - 1))
    def test_random_feasible_models_sum_to_one(self, seed):
        rng = np.random.default_rng(seed)
        model = random_feasible_model(rng)
        n_bins = int(rng.integers(2, 9))
        inner = np.sort(rng.uniform(0.5, W - 0.5, size=n_bins - 1))
        edges = np.concatenate([[0.0], inner, [W]])
        if np.any(np.diff(edges) < 1e-3):
            edges = np.linspace(0.0, W, n_bins + 1)
        pi = bin_probabilities(model, edges, W)
        assert pi.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(pi >= 0)

    def test_matches_scipy_per_bin(self):
        rng = np.random.default_rng(77)
        for _ in range(20):
            model = random_feasible_model(rng)
            edges = np.linspace(0.0, W, 6)
            pi = bin_probabilities(model, edges, W)
            raw = [
                quad_oracle(lambda r: 2.0 * r * g_values(r, model, W), a, b)
                for a, b in zip(edges[:-1], edges[1:])
            ]
            np.testing.assert_allclose(pi, np.asarray(raw) / sum(raw), rtol=1e-8)


class TestEstimateP:
    def test_uniform_is_exactly_one(self):
        assert estimate_P(uniform_model(), W) == 1.0

    def test_half_normal_closed_form(self):
        # (2 s^2 / w^2) (1 - exp(-w^2 / (2 s^2)))
        sigma = 5.0
        expected = (2 * sigma**2 / W**2) * (1.0 - math.exp(-(W**2) / (2 * sigma**2)))
        assert estimate_P(half_normal_model(sigma), W) == pytest.approx(
            expected, rel=1e-12
        )
        assert expected == pytest.approx(0.21975355632483504, rel=1e-15)

    def test_matches_scipy_for_hazard_rate(self):
        m = hazard_rate_model(sigma=6.0, b=2.5)
        oracle = quad_oracle(lambda r: 2.0 * r * g_values(r, m, W), 0.0, W) / W**2
        assert estimate_P(m, W) == pytest.approx(oracle, rel=1e-9)

    def test_P_bounded_by_one(self):
        rng = np.random.default_rng(5150)
        for _ in range(50):
            m = random_feasible_model(rng)
            p = estimate_P(m, W)
            assert 0.0 < p <= 1.0 + 1e-9

    def test_wider_sigma_detects_more(self):
        ps = [estimate_P(half_normal_model(s), W) for s in (2.0, 4.0, 8.0, 16.0)]
        assert ps == sorted(ps)
