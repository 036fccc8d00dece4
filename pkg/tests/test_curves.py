import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from cheyette_ca.curves import (
    BasisSpread,
    CurveSet,
    DiscountCurve,
    SwapSchedule,
    annuity,
    df_estimation,
    df_ois,
    forward_rate,
    swap_rates,
)
from cheyette_ca.errors import DomainError


def loglinear_oracle(knots, T):
    """Independent log-linear discount interpolation through (0, 1) and the knots."""
    pts = [(0.0, 0.0)] + [(t, -r * t) for t, r in knots]
    for (t0, l0), (t1, l1) in zip(pts, pts[1:]):
        if t0 <= T <= t1:
            w = (T - t0) / (t1 - t0)
            return math.exp(l0 + w * (l1 - l0))
    return math.exp(-knots[-1][1] * T)


class TestDiscount:
    def test_flat(self, flat_curve):
        assert df_ois(flat_curve, 0.0, 2.0) == pytest.approx(math.exp(-0.02), rel=1e-15)
        assert df_ois(flat_curve, 0.0, 2.0) == pytest.approx(0.980199, abs=1e-6)

    def test_same_time_is_one(self, knot_curve):
        assert df_ois(knot_curve, 3.0, 3.0) == 1.0

    def test_knot_interpolation_matches_oracle(self):
        knots = [(1.0, 0.01), (2.0, 0.012)]
        curve = CurveSet(DiscountCurve.from_knots(knots))
        for T in (0.3, 1.0, 1.5, 2.0, 3.7):
            assert abs(df_ois(curve, 0.0, T) - loglinear_oracle(knots, T)) < 1e-14

    def test_forward_df_ratio(self, knot_curve):
        ratio = loglinear_oracle([(1.0, 0.01), (2.0, 0.012), (5.0, 0.015)], 3.0) / loglinear_oracle(
            [(1.0, 0.01), (2.0, 0.012), (5.0, 0.015)], 1.2
        )
        assert df_ois(knot_curve, 1.2, 3.0) == pytest.approx(ratio, rel=1e-14)

    def test_reversed_times_rejected(self, flat_curve):
        with pytest.raises(DomainError):
            df_ois(flat_curve, 2.0, 1.0)

    def test_bad_knots_rejected(self):
        with pytest.raises(DomainError):
            DiscountCurve((1.0, 1.0), (0.01, 0.02))

    def test_inst_forward_flat(self, flat_curve):
        assert np.allclose(flat_curve.ois.inst_forward([0.0, 0.5, 7.0]), 0.01)


class TestEstimation:
    def test_zero_basis(self, flat_curve):
        assert df_estimation(flat_curve, 0.5, 3.0) == df_ois(flat_curve, 0.5, 3.0)

    def test_constant_basis(self):
        curve = CurveSet.flat(0.01, spread=0.002)
        assert df_estimation(curve, 0.0, 1.0) == pytest.approx(math.exp(-0.012), rel=1e-15)

    def test_piecewise_basis_vs_quadrature(self):
        basis = BasisSpread.from_pairs([(0.0, 0.001), (0.25, 0.003), (1.0, -0.0005)])
        for tau in (0.1, 0.25, 0.7, 1.0, 2.5):
            oracle, _ = quad(lambda u: float(basis.spread(u)), 0.0, tau, points=[0.25, 1.0], epsabs=1e-15)
            assert abs(basis.integral(tau) - oracle) < 1e-12

    def test_H_is_time_homogeneous(self, knot_curve):
        assert knot_curve.H(0.0, 0.75) == pytest.approx(knot_curve.H(3.0, 3.75), rel=1e-15)
        assert knot_curve.H(2.0, 2.0) == 1.0

    @given(st.one_of(st.just(0.0), st.floats(1e-6, 0.01), st.floats(-0.01, -1e-6)), st.floats(0.01, 5.0))
    def test_estimation_below_ois_iff_positive_spread(self, s, T):
        curve = CurveSet.flat(0.01, spread=s)
        pe, po = df_estimation(curve, 0.0, T), df_ois(curve, 0.0, T)
        if s > 0:
            assert pe < po
        elif s < 0:
            assert pe > po
        else:
            assert pe == po


class TestForward:
    def test_flat(self, flat_curve):
        assert forward_rate(flat_curve, 0.0, 1.0, 1.25) == pytest.approx(4 * math.expm1(0.0025), rel=1e-14)
        assert forward_rate(flat_curve, 0.0, 1.0, 1.25) == pytest.approx(0.0100125, abs=1e-7)

    def test_zero_rates(self):
        assert forward_rate(CurveSet.flat(0.0), 0.0, 1.0, 2.0) == 0.0

    def test_knot_curve_matches_df_ratio(self, knot_curve):
        expected = (df_estimation(knot_curve, 0.0, 1.5) / df_estimation(knot_curve, 0.0, 2.25) - 1) / 0.75
        assert forward_rate(knot_curve, 0.0, 1.5, 2.25) == pytest.approx(expected, rel=1e-14)

    def test_degenerate_period(self, flat_curve):
        with pytest.raises(DomainError):
            forward_rate(flat_curve, 0.0, 1.0, 1.0)

    @given(st.floats(0.0, 1.0), st.floats(1.0, 5.0), st.floats(0.05, 2.0))
    def test_invariant_under_common_rescaling(self, t0, t1, d):
        # moving the observation date rescales both bonds by 1 / P(0, t0)
        curve = CurveSet(DiscountCurve.from_knots([(1.0, 0.01), (3.0, 0.02)]), BasisSpread.constant(0.001))
        assert forward_rate(curve, t0, t1, t1 + d) == pytest.approx(forward_rate(curve, 0.0, t1, t1 + d), rel=1e-12)


class TestSwap:
    def test_single_period_annuity(self, flat_curve):
        sched = SwapSchedule.regular(0.0, 1.0)
        assert annuity(flat_curve, sched) == pytest.approx(math.exp(-0.01), rel=1e-15)

    def test_two_periods(self, knot_curve):
        sched = SwapSchedule.regular(1.0, 1.0, frequency=2)
        manual = 0.5 * df_ois(knot_curve, 0.0, 1.5) + 0.5 * df_ois(knot_curve, 0.0, 2.0)
        assert abs(annuity(knot_curve, sched) - manual) < 1e-15

    def test_zero_rates_annuity(self):
        sched = SwapSchedule.regular(2.0, 5.0)
        assert annuity(CurveSet.flat(0.0), sched) == pytest.approx(5.0, rel=1e-15)

    def test_zero_basis(self, flat_curve):
        s_ab, s_ois, spread = swap_rates(flat_curve, SwapSchedule.regular(1.0, 5.0))
        assert s_ab == s_ois and spread == 0.0

    def test_single_period_equals_forward(self, knot_curve):
        sched = SwapSchedule.regular(1.0, 0.5, frequency=2)
        ois_only = CurveSet(knot_curve.ois)
        fwd = forward_rate(ois_only, 0.0, 1.0, 1.5)
        assert abs(swap_rates(knot_curve, sched).S_ois - fwd) < 1e-13

    def test_five_year_brute_force(self, flat_curve):
        sched = SwapSchedule.regular(0.0, 5.0)
        num = 1.0 - math.exp(-0.05)
        den = sum(math.exp(-0.01 * j) for j in range(1, 6))
        assert abs(swap_rates(flat_curve, sched).S_ois - num / den) < 1e-14

    def test_frozen_spread_positive_for_positive_basis(self):
        curve = CurveSet.flat(0.01, spread=0.002)
        rates = swap_rates(curve, SwapSchedule.regular(1.0, 5.0))
        assert rates.frozen_spread > 0 and rates.S_ab == pytest.approx(rates.S_ois + rates.frozen_spread)

    def test_annuity_increases_with_periods(self, knot_curve):
        values = [annuity(knot_curve, SwapSchedule.regular(1.0, n)) for n in range(1, 8)]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_schedule_validation(self):
        with pytest.raises(DomainError):
            SwapSchedule((1.0,), (1.0,), 1.0)
        with pytest.raises(DomainError):
            SwapSchedule((1.0, 2.0), (1.0, 2.0), 2.5)
        with pytest.raises(DomainError):
            SwapSchedule((1.0, 3.0), (1.0, 2.0), 2.0)

    def test_annuity_after_start_rejected(self, flat_curve):
        with pytest.raises(DomainError):
            annuity(flat_curve, SwapSchedule.regular(1.0, 2.0), t=1.5)

    @settings(max_examples=30)
    @given(st.integers(1, 10), st.floats(0.0, 0.05))
    def test_curve_from_json(self, n, r):
        curve = CurveSet.from_json(f'{{"flat_rate": {r}, "basis": [[0, 0.001]]}}')
        assert curve.ois.df(float(n)) == pytest.approx(math.exp(-r * n))
        assert not curve.basis.is_zero
