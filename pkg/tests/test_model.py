import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad, quad

from cheyette_ca.curves import CurveSet
from cheyette_ca.errors import DomainError
from cheyette_ca.kernels import KernelContext, beta, nu
from cheyette_ca.model import (
    G,
    CheyetteSpec,
    HullWhiteSpec,
    MeanReversion,
    ModelState,
    bond_reconstruct,
    expected_integrated_short_rate,
    integrated_x_drift,
    tanh_volatility,
    textbook_hull_white_volatility,
    x_bar_drift,
    y_bar,
)


class TestMeanReversion:
    def test_rejects_non_positive(self):
        with pytest.raises(DomainError):
            MeanReversion.constant(0.0)
        with pytest.raises(DomainError):
            MeanReversion((0.5,), (0.1,))

    def test_cumulative_piecewise(self):
        k = MeanReversion.from_pairs([(0, 0.1), (1, 0.3)])
        assert k.cumulative(2.5) == pytest.approx(0.1 + 0.3 * 1.5, rel=1e-15)
        assert k.decay(0.5, 2.0) == pytest.approx(math.exp(-(0.05 + 0.3)), rel=1e-15)
        assert k.accumulation(1.0) == pytest.approx(math.exp(0.1), rel=1e-15)


class TestG:
    def test_zero_reversion_limit(self, flat_curve):
        spec = HullWhiteSpec(0.01, 1e-12).to_cheyette(flat_curve)
        assert abs(G(spec, 0.0, 1.0) - 1.0) < 1e-9

    def test_matches_double_integral(self, flat_curve):
        spec = HullWhiteSpec(0.01, 0.003).to_cheyette(flat_curve)
        oracle, _ = quad(lambda u: math.exp(-quad(lambda s: 0.003, 0.0, u)[0]), 0.0, 1.0, epsabs=1e-15)
        assert abs(G(spec, 0.0, 1.0) - oracle) < 1e-12

    def test_piecewise_matches_quadrature(self, piecewise_spec):
        k = piecewise_spec.k
        oracle, _ = quad(lambda u: math.exp(-(k.cumulative(u) - k.cumulative(0.7))), 0.7, 6.0, points=[1.5, 4.0], epsabs=1e-15)
        assert abs(G(piecewise_spec, 0.7, 6.0) - oracle) < 1e-12

    def test_empty_interval(self, hw_futures):
        assert G(hw_futures, 2.0, 2.0) == 0.0

    def test_reversed(self, hw_futures):
        with pytest.raises(DomainError):
            G(hw_futures, 2.0, 1.0)

    @given(st.floats(0.0, 10.0), st.floats(0.0, 20.0), st.floats(0.001, 2.0), st.floats(0.001, 2.0))
    def test_bounds(self, t, tau, k1, k2):
        k = MeanReversion.from_pairs([(0.0, k1), (3.0, k2)])
        g = float(k.G(t, t + tau))
        assert 0.0 <= g <= tau * (1 + 1e-14)


class TestBondReconstruct:
    def test_zero_state_is_forward_ratio(self, knot_curve):
        spec = HullWhiteSpec(0.01, 0.05).to_cheyette(knot_curve)
        T = np.linspace(1.0, 30.0, 50)
        out = bond_reconstruct(spec, 1.0, T, ModelState(1.0))
        assert np.allclose(out, knot_curve.ois.df(T) / knot_curve.ois.df(1.0), rtol=1e-15, atol=0)

    def test_maturity_identity(self, hw_futures):
        assert bond_reconstruct(hw_futures, 2.0, 2.0, ModelState(2.0, 0.03, 0.001)) == 1.0

    def test_direct_formula(self, hw_futures):
        g = (1 - math.exp(-0.003)) / 0.003
        expected = math.exp(-0.02) / math.exp(-0.01) * math.exp(-g * 0.01 - 0.5 * g * g * 0.0001)
        got = bond_reconstruct(hw_futures, 1.0, 2.0, ModelState(1.0, 0.01, 0.0001))
        assert abs(got - expected) < 1e-14

    def test_state_time_mismatch(self, hw_futures):
        with pytest.raises(DomainError):
            bond_reconstruct(hw_futures, 1.0, 2.0, ModelState(0.5))

    def test_negative_y_rejected(self):
        with pytest.raises(DomainError):
            ModelState(1.0, 0.0, -1e-9)


class TestApproximations:
    def test_y_bar_at_zero(self, hw_futures):
        assert y_bar(hw_futures, 0.0) == 0.0

    @pytest.mark.parametrize("t", [0.5, 1.0, 7.0, 30.0])
    def test_y_bar_hull_white(self, flat_curve, t):
        hw = HullWhiteSpec(0.015, 0.003)
        spec = hw.to_cheyette(flat_curve)
        oracle, _ = quad(lambda u: math.exp(-2 * 0.003 * (t - u)) * 0.015**2 * math.exp(-2 * 0.003 * u), 0.0, t, epsabs=1e-16)
        assert abs(y_bar(spec, t) - oracle) < 1e-12
        assert abs(y_bar(spec, t) - hw.y_bar(t)) < 1e-12

    def test_y_bar_piecewise_vs_quadrature(self, piecewise_spec):
        k, vol = piecewise_spec.k, piecewise_spec.vol
        t = 5.0
        oracle, _ = quad(lambda u: float(k.decay(u, t) ** 2 * vol.eta(u) ** 2), 0.0, t, points=[1.5, 2.0, 4.0], epsabs=1e-16)
        assert abs(y_bar(piecewise_spec, t) - oracle) < 1e-12

    def test_y_bar_bound(self, tanh_spec):
        alpha2 = tanh_spec.vol.alpha2
        bound = alpha2**2 / (2 * tanh_spec.k.lower_bound)
        t = np.linspace(0.0, 50.0, 101)
        assert np.all(y_bar(tanh_spec, t) <= bound)

    def test_x_bar_drift_trivial(self, hw_futures, flat_curve):
        assert x_bar_drift(hw_futures, 0.0) == 0.0
        assert x_bar_drift(HullWhiteSpec(0.0, 0.003).to_cheyette(flat_curve), 5.0) == 0.0

    @pytest.mark.parametrize("t", [1.0, 5.0, 10.0])
    def test_x_bar_drift_nested_quadrature(self, flat_curve, t):
        s, k = 0.015, 0.003
        spec = HullWhiteSpec(s, k).to_cheyette(flat_curve)
        oracle, _ = dblquad(
            lambda v, u: math.exp(-k * (t - u)) * math.exp(-2 * k * (u - v)) * s**2 * math.exp(-2 * k * v),
            0.0,
            t,
            0.0,
            lambda u: u,
            epsabs=1e-16,
        )
        assert abs(x_bar_drift(spec, t) - oracle) < 1e-10

    def test_integrated_drift_matches_direct_integral(self, piecewise_spec):
        direct, _ = quad(lambda u: float(x_bar_drift(piecewise_spec, u)), 1.0, 3.5, points=[1.5, 2.0], epsabs=1e-16)
        assert abs(integrated_x_drift(piecewise_spec, 1.0, 3.5) - direct) < 1e-13


class TestExpectedIntegratedRate:
    def test_deterministic(self, knot_curve):
        spec = HullWhiteSpec(0.0, 0.01).to_cheyette(knot_curve)
        expected = -math.log(knot_curve.ois.df(3.0) / knot_curve.ois.df(1.0))
        assert expected_integrated_short_rate(spec, 1.0, 3.0) == pytest.approx(expected, rel=1e-15)

    def test_textbook_closed_form(self, flat_curve):
        # sigma(t, T) = sigma exp(-k (T - t)), i.e. eta = sigma
        s, k, t0, t1 = 0.01, 0.003, 1.0, 1.25
        spec = CheyetteSpec(MeanReversion.constant(k), textbook_hull_white_volatility(s), flat_curve)
        d = t1 - t0
        closed = s**2 / (2 * k**2) * (
            d - 2 * (math.exp(-k * t0) - math.exp(-k * t1)) / k + (math.exp(-2 * k * t0) - math.exp(-2 * k * t1)) / (2 * k)
        )
        assert abs(expected_integrated_short_rate(spec, t0, t1) - (0.01 * d + closed)) < 1e-10

    def test_decaying_vol_convention_vs_quadrature(self, flat_curve):
        s, k, t0, t1 = 0.01, 0.003, 1.0, 1.25

        def ex(u):
            return quad(lambda v: math.exp(-k * (u - v)) * s**2 * v * math.exp(-2 * k * v), 0.0, u, epsabs=1e-16)[0]

        oracle = quad(ex, t0, t1, epsabs=1e-16)[0]
        spec = HullWhiteSpec(s, k).to_cheyette(flat_curve)
        assert abs(expected_integrated_short_rate(spec, t0, t1) - 0.0025 - oracle) < 1e-12

    def test_vanishing_interval(self, hw_futures):
        assert expected_integrated_short_rate(hw_futures, 1.0, 1.0 + 1e-9) == pytest.approx(0.01e-9, rel=1e-4)

    def test_bad_interval(self, hw_futures):
        with pytest.raises(DomainError):
            expected_integrated_short_rate(hw_futures, 1.0, 1.0)


class TestHullWhiteConvention:
    @settings(max_examples=30)
    @given(st.floats(0.0, 10.0), st.floats(0.0, 10.0), st.floats(0.001, 0.5))
    def test_kernels_reproduce_closed_forms(self, s, dt, k):
        hw = HullWhiteSpec(0.015, k)
        ctx = KernelContext(hw.to_cheyette(CurveSet.flat(0.01)))
        u = s + dt
        assert beta(ctx, s, u) == pytest.approx(hw.beta(s, u), rel=1e-12)
        assert nu(ctx, s, u) == pytest.approx(hw.nu(s, u), rel=1e-10, abs=1e-16)

    def test_eta_convention(self, flat_curve):
        spec = HullWhiteSpec(0.02, 0.1).to_cheyette(flat_curve)
        assert spec.vol.eta(3.0, 0.5, 0.1) == pytest.approx(0.02 * math.exp(-0.3), rel=1e-15)


class TestVolatility:
    def test_tanh_bounds_and_partials(self):
        vol = tanh_volatility(0.05, 0.1, 0.5)
        assert vol.check_bounds()
        t, x = 1.3, 0.2
        h = 1e-6
        fd = (vol.fn(t, x + h, 0.0) - vol.fn(t, x - h, 0.0)) / (2 * h)
        assert vol.eta_dx(t, x, 0.0) == pytest.approx(fd, rel=1e-8)
        fd2 = (vol.fn(t, x + 1e-4, 0.0) - 2 * vol.fn(t, x, 0.0) + vol.fn(t, x - 1e-4, 0.0)) / 1e-8
        assert vol.eta_dxx(t, x, 0.0) == pytest.approx(fd2, rel=1e-5)
        assert vol.derivative_source == "analytic"

    def test_tanh_rejects_large_c(self):
        with pytest.raises(DomainError):
            tanh_volatility(0.05, 0.1, 1.0)

    def test_finite_difference_fallback(self):
        from cheyette_ca.model import StateDependentVol

        vol = StateDependentVol(lambda t, x, y: 0.01 * (1 + 0.2 * np.sin(x)) + 0 * t + 0 * y)
        assert vol.derivative_source == "finite_difference"
        assert vol.eta_dx(0.0, 0.3, 0.0) == pytest.approx(0.002 * math.cos(0.3), rel=1e-7)
        assert vol.eta_dxx(0.0, 0.3, 0.0) == pytest.approx(-0.002 * math.sin(0.3), rel=1e-4)
