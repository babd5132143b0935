import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from divbar import ExponentialFamily, TabulatedDensity
from divbar.errors import DivergentIntegral, InvalidMeasure
from divbar.levy import (
    exp_jump_integral,
    exp_jump_integral_by_quadrature,
    mean_jump,
    nu_integral,
    power_jump_integral,
    sample_jump,
    total_mass,
)


def brute_trapezoid(f, rate=1.0, z_hi=60.0, n=2_000_001):
    """Independent oracle: dense trapezoid against the exponential density."""
    z = np.linspace(0.0, z_hi, n)
    return np.trapezoid(f(z) * np.exp(-rate * z), z)


class TestMassAndMean:
    def test_exponential_mass(self):
        assert total_mass(ExponentialFamily(1.0)) == 1.0
        assert total_mass(ExponentialFamily(2.0)) == 0.5

    def test_exponential_mean(self):
        assert mean_jump(ExponentialFamily(1.0)) == 1.0
        assert mean_jump(ExponentialFamily(2.0)) == 0.25

    def test_tabulated_mass_and_mean(self, tabulated_unit):
        assert total_mass(tabulated_unit) == pytest.approx(1.0, abs=1e-8)
        assert mean_jump(tabulated_unit) == pytest.approx(1.0, abs=1e-8)

    def test_invalid_specs(self):
        with pytest.raises(InvalidMeasure):
            ExponentialFamily(0.0)
        with pytest.raises(InvalidMeasure):
            ExponentialFamily(-1.0)
        with pytest.raises(InvalidMeasure):
            TabulatedDensity(z=[0.0, 1.0], density=[1.0, -0.1], tail_rate=1.0)
        with pytest.raises(InvalidMeasure):
            TabulatedDensity(z=[0.5, 1.0], density=[1.0, 1.0], tail_rate=1.0)
        with pytest.raises(InvalidMeasure):
            TabulatedDensity(z=[0.0, 1.0], density=[1.0, 1.0], tail_rate=-2.0)


class TestExpJumpIntegral:
    def test_zero_exponent(self):
        assert exp_jump_integral(ExponentialFamily(1.0), 0.5, 0.0) == 0.0

    def test_closed_form_values(self):
        # (k d)^2 / (t^2 (t - k d))
        assert exp_jump_integral(ExponentialFamily(1.0), 0.5, 1.0) == pytest.approx(0.5)
        assert exp_jump_integral(ExponentialFamily(2.0), 0.5, -2.0) == pytest.approx(
            1.0 / 12.0
        )

    def test_divergence(self):
        with pytest.raises(DivergentIntegral):
            exp_jump_integral(ExponentialFamily(1.0), 0.5, 2.0)
        with pytest.raises(DivergentIntegral):
            exp_jump_integral(ExponentialFamily(1.0), 0.5, 2.5)

    @pytest.mark.parametrize("t", [0.7, 1.0, 2.0, 4.0])
    @pytest.mark.parametrize("k", [0.1, 0.5, 1.0])
    @pytest.mark.parametrize("d", [-3.0, -0.5, 0.3, 0.6])
    def test_quadrature_matches_closed_form(self, t, k, d):
        if k * d >= 0.9 * t:
            pytest.skip("outside the guarded domain")
        closed = exp_jump_integral(ExponentialFamily(t), k, d)
        quadr = exp_jump_integral_by_quadrature(ExponentialFamily(t), k, d)
        assert quadr == pytest.approx(closed, abs=1e-9)

    def test_tabulated_matches_exponential(self, tabulated_unit):
        for k, d in [(0.5, 1.0), (0.5, -2.0), (0.2, 0.9)]:
            exact = exp_jump_integral(ExponentialFamily(1.0), k, d)
            tab = exp_jump_integral(tabulated_unit, k, d)
            assert tab == pytest.approx(exact, abs=1e-8)

    @given(
        d=st.floats(min_value=-5.0, max_value=1.8),
        k=st.floats(min_value=0.01, max_value=0.5),
    )
    @settings(max_examples=60, deadline=None)
    def test_nonnegative(self, d, k):
        assert exp_jump_integral(ExponentialFamily(1.0), k, d) >= 0.0

    def test_convex_in_d(self):
        spec = ExponentialFamily(1.0)
        d = np.linspace(-4.0, 1.5, 200)
        vals = np.array([exp_jump_integral(spec, 0.5, x) for x in d])
        assert np.all(np.diff(vals, 2) >= -1e-8)


class TestPowerJumpIntegral:
    def test_zero_scale(self):
        assert power_jump_integral(ExponentialFamily(1.0), 0.5, 0.0) == 0.0

    def test_golden_value(self):
        # frozen from the dense-trapezoid oracle below
        val = power_jump_integral(ExponentialFamily(1.0), 0.5, 1.0)
        assert val == pytest.approx(-0.12106392192934391, abs=1e-9)

    def test_against_trapezoid_oracle(self):
        val = power_jump_integral(ExponentialFamily(1.0), 0.5, 1.0)
        oracle = brute_trapezoid(lambda z: np.sqrt(1.0 + z) - 1.0 - 0.5 * z)
        assert val == pytest.approx(oracle, abs=1e-10)

    def test_tabulated_cross_representation(self, tabulated_unit):
        a = power_jump_integral(ExponentialFamily(1.0), 0.5, 1.0)
        b = power_jump_integral(tabulated_unit, 0.5, 1.0)
        assert b == pytest.approx(a, abs=1e-8)

    @given(
        gamma=st.floats(min_value=0.05, max_value=0.95),
        b=st.floats(min_value=1e-3, max_value=20.0),
    )
    @settings(max_examples=60, deadline=None)
    def test_nonpositive(self, gamma, b):
        assert power_jump_integral(ExponentialFamily(1.0), gamma, b) <= 0.0


class TestSampling:
    def test_inverse_cdf_exponential(self):
        assert sample_jump(ExponentialFamily(1.0), 1.0 - math.exp(-1.0)) == (
            pytest.approx(1.0)
        )
        assert sample_jump(ExponentialFamily(2.0), 1.0 - math.exp(-2.0)) == (
            pytest.approx(1.0)
        )

    def test_tabulated_median(self, tabulated_unit):
        # median of exp(1) is ln 2
        med = sample_jump(tabulated_unit, 0.5)
        assert med == pytest.approx(math.log(2.0), abs=1e-6)

    @pytest.mark.parametrize("spec_name", ["exp", "table"])
    def test_empirical_mean(self, spec_name, tabulated_unit):
        spec = ExponentialFamily(2.0) if spec_name == "exp" else tabulated_unit
        rng = np.random.default_rng(1234)
        u = rng.random(1_000_000)
        u = np.clip(u, 1e-12, 1.0 - 1e-12)
        draws = sample_jump(spec, u)
        target = mean_jump(spec) / total_mass(spec)
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - target) < 4.0 * se

    def test_deterministic(self, tabulated_unit):
        assert sample_jump(tabulated_unit, 0.25) == sample_jump(tabulated_unit, 0.25)


def test_nu_integral_divergence_guard():
    with pytest.raises(DivergentIntegral):
        nu_integral(ExponentialFamily(1.0), lambda z: np.exp(2.0 * z), decay=2.0)
