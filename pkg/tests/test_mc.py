import math

import numpy as np
import pytest

from cheyette_ca import mc
from cheyette_ca.adjusters import Cms, FraInArrears, Future, OisFuture, convexity_adjustment, natural_forward_rate
from cheyette_ca.curves import forward_rate, swap_rates
from cheyette_ca.errors import DomainError, NumericError
from cheyette_ca.mc import (
    McConfig,
    McEstimate,
    annuity_ratio_check,
    discount_bond_ratio,
    estimate,
    mc_cms,
    mc_forward_benchmark,
    mc_future_rate,
    mc_rate,
    simulate,
    state_approx_error,
)
from cheyette_ca.model import HullWhiteSpec, y_bar

SMALL = McConfig(paths=20_000, steps_per_year=50, seed=7)


class TestConfig:
    @pytest.mark.parametrize("kw", [{"paths": 1}, {"steps_per_year": 5}, {"seed": -1}])
    def test_rejects(self, kw):
        with pytest.raises(DomainError):
            McConfig(**kw)

    def test_path_counts(self):
        assert McConfig(paths=7).total_paths == 8
        assert McConfig(paths=7, antithetic=False).total_paths == 7

    def test_estimate_non_finite(self):
        with pytest.raises(NumericError):
            estimate(np.array([1.0, np.nan]), False)

    def test_estimate_pairs(self):
        e = estimate(np.array([1.0, 3.0, 2.0, 2.0]), True)
        assert e.mean == 2.0 and e.std_error == 0.0 and e.paths == 4

    def test_z_score(self):
        assert McEstimate(1.0, 0.0, 2).z_score(1.0) == 0.0
        assert McEstimate(1.0, 0.5, 2).z_score(0.0) == 2.0


class TestSimulation:
    def test_shapes_and_record_times(self, hw_futures):
        ens = simulate(hw_futures, McConfig(paths=100), 2.0, [0.5, 1.0])
        assert ens.times.tolist() == [0.0, 0.5, 1.0, 2.0]
        assert ens.x.shape == (4, 100)
        with pytest.raises(DomainError):
            ens.index(0.7)

    def test_bad_record_times(self, hw_futures):
        with pytest.raises(DomainError):
            simulate(hw_futures, SMALL, 1.0, [2.0])
        with pytest.raises(DomainError):
            simulate(hw_futures, SMALL, 0.0)

    def test_zero_volatility_is_deterministic(self, knot_curve):
        spec = HullWhiteSpec(0.0, 0.05).to_cheyette(knot_curve)
        est = mc_future_rate(spec, SMALL, Future(2.0, 2.0, 2.25))
        assert est.std_error == 0.0
        assert est.mean == pytest.approx(natural_forward_rate(knot_curve, Future(2.0, 2.0, 2.25)), rel=1e-12)

    @pytest.mark.parametrize("t", [1.0, 5.0])
    def test_variance_matches_y_bar(self, hw_futures, t):
        ens = simulate(hw_futures, McConfig(paths=100_000, seed=3), t)
        x, y, _ = ens.at(t)
        assert np.all(y == y_bar(hw_futures, t))
        # antithetic samples are not independent, but the variance estimate is still unbiased
        assert np.var(x) == pytest.approx(float(y_bar(hw_futures, t)), rel=0.03)

    def test_exact_scheme_ignores_step_size(self, hw_futures):
        a = simulate(hw_futures, McConfig(paths=500, steps_per_year=12), 3.0)
        b = simulate(hw_futures, McConfig(paths=500, steps_per_year=1000), 3.0)
        assert np.array_equal(a.x, b.x) and np.array_equal(a.integrated_r, b.integrated_r)


class TestMartingales:
    @pytest.mark.parametrize("spec_name", ["hw_futures", "tanh_spec", "piecewise_spec"])
    def test_discount_bond_ratio(self, spec_name, request):
        # 250 steps keep the Euler bias of the state-dependent scheme well below one SE
        spec = request.getfixturevalue(spec_name)
        for est in discount_bond_ratio(spec, McConfig(paths=20_000, steps_per_year=250, seed=7), [1.0, 3.0, 5.0]):
            assert abs(est.z_score(1.0)) < 4

    def test_forward_benchmark(self, knot_curve):
        spec = HullWhiteSpec(0.015, 0.003).to_cheyette(knot_curve)
        p = Future(3.0, 3.0, 3.25)
        est = mc_forward_benchmark(spec, SMALL, p)
        assert abs(est.z_score(natural_forward_rate(knot_curve, p))) < 4

    def test_benchmark_without_basis_is_curve_forward(self, flat_curve):
        spec = HullWhiteSpec(0.015, 0.003).to_cheyette(flat_curve)
        est = mc_forward_benchmark(spec, SMALL, Future(3.0, 3.0, 3.25))
        assert abs(est.z_score(forward_rate(flat_curve, 0.0, 3.0, 3.25))) < 4

    def test_annuity_ratio(self, tanh_spec):
        est = annuity_ratio_check(tanh_spec, SMALL, Cms.regular(2.0, 3.0).schedule)
        assert abs(est.z_score(1.0)) < 4


class TestReproducibility:
    def test_same_seed_same_bits(self, tanh_spec):
        a = mc_future_rate(tanh_spec, SMALL, Future(1.0, 1.0, 1.25))
        b = mc_future_rate(tanh_spec, SMALL, Future(1.0, 1.0, 1.25))
        assert a == b

    def test_seed_changes_result(self, hw_futures):
        a = mc_future_rate(hw_futures, SMALL, Future(1.0, 1.0, 1.25))
        b = mc_future_rate(hw_futures, McConfig(paths=20_000, steps_per_year=50, seed=8), Future(1.0, 1.0, 1.25))
        assert a.mean != b.mean

    @pytest.mark.parametrize("spec_name", ["hw_futures", "tanh_spec"])
    def test_worker_count_independent(self, spec_name, request, monkeypatch):
        spec = request.getfixturevalue(spec_name)
        cfg = McConfig(paths=3 * mc.CHUNK_PAIRS * 2 + 10, steps_per_year=20, seed=11)
        monkeypatch.setattr(mc, "_workers", lambda: 1)
        one = simulate(spec, cfg, 1.0)
        monkeypatch.setattr(mc, "_workers", lambda: 4)
        four = simulate(spec, cfg, 1.0)
        assert np.array_equal(one.x, four.x) and np.array_equal(one.integrated_r, four.integrated_r)

    def test_thread_cap_env(self, monkeypatch):
        monkeypatch.setenv(mc.THREADS_ENV, "1")
        assert mc._workers() == 1
        monkeypatch.setenv(mc.THREADS_ENV, "many")
        assert mc._workers() >= 1

    def test_antithetic_pairs_mirror(self, hw_futures):
        ens = simulate(hw_futures, McConfig(paths=10), 1.0)
        x = ens.x[1]
        drift = x[0::2] + x[1::2]
        assert np.allclose(drift, drift[0], rtol=0, atol=1e-15)


class TestAgreement:
    @pytest.mark.parametrize("antithetic", [True, False])
    def test_futures_within_tolerance(self, hw_futures, antithetic):
        p = Future(3.0, 3.0, 3.25)
        res = convexity_adjustment(hw_futures, p)
        est = mc_rate(hw_futures, McConfig(paths=50_000, seed=5, antithetic=antithetic), p)
        assert abs(est.z_score(res.adjusted_rate)) < 4

    def test_ois_plain(self, hw_futures):
        p = OisFuture(3.0, 3.25, "compounding")
        res = convexity_adjustment(hw_futures, p)
        est = mc_rate(hw_futures, McConfig(paths=50_000, seed=5, antithetic=False), p)
        assert abs(est.z_score(res.adjusted_rate)) < 4

    def test_fra_state_dependent(self, tanh_spec):
        p = FraInArrears(2.0, 2.25)
        res = convexity_adjustment(tanh_spec, p)
        est = mc_rate(tanh_spec, McConfig(paths=50_000, steps_per_year=100, seed=5), p)
        assert abs(est.mean - res.adjusted_rate) < 4 * est.std_error + 0.05 * abs(res.adjustment)

    def test_state_dependent_step_halving(self, tanh_spec):
        p = FraInArrears(2.0, 2.25)
        a = mc_rate(tanh_spec, McConfig(paths=40_000, steps_per_year=50, seed=2), p)
        b = mc_rate(tanh_spec, McConfig(paths=40_000, steps_per_year=100, seed=2), p)
        assert abs(a.mean - b.mean) < 4 * math.hypot(a.std_error, b.std_error)

    def test_standard_error_scaling(self, hw_futures):
        p = Future(3.0, 3.0, 3.25)
        se = [mc_rate(hw_futures, McConfig(paths=n, seed=9), p).std_error for n in (20_000, 40_000, 80_000)]
        assert se[1] / se[0] == pytest.approx(1 / math.sqrt(2), rel=0.1)
        assert se[2] / se[0] == pytest.approx(0.5, rel=0.1)


class TestCms:
    def test_single_period_paid_at_end_is_forward(self, knot_curve):
        # S * annuity(ta) = 1 - P(ta, tb) is a traded quantity, so no adjustment arises
        spec = HullWhiteSpec(0.015, 0.05).to_cheyette(knot_curve)
        p = Cms.regular(3.0, 1.0, payment_lag=1.0)
        res = convexity_adjustment(spec, p)
        assert abs(res.adjustment) < 1e-15
        est = mc_cms(spec, SMALL, p)
        assert abs(est.z_score(swap_rates(knot_curve, p.schedule).S_ab)) < 4

    def test_expiry_today(self, knot_curve):
        spec = HullWhiteSpec(0.015, 0.05).to_cheyette(knot_curve)
        p = Cms(Cms.regular(0.0, 2.0).schedule)
        assert mc_cms(spec, SMALL, p).mean == swap_rates(knot_curve, p.schedule).S_ab


class TestApproximationError:
    def test_zero_for_time_dependent_vol(self, hw_futures):
        est = state_approx_error(hw_futures, McConfig(paths=2000, steps_per_year=50), 5.0)
        assert est.mean == 0.0

    def test_short_time_slope(self, tanh_spec):
        times = [0.1, 0.2, 0.4]
        ests = state_approx_error(tanh_spec, McConfig(paths=10_000, steps_per_year=250), 0.4, times[:-1])
        slope = np.polyfit(np.log(times), np.log([e.mean for e in ests]), 1)[0]
        assert slope >= 2.5

    @pytest.mark.slow
    def test_bounded_at_long_horizons(self, tanh_spec):
        times = [1.0, 5.0, 10.0, 20.0, 30.0]
        ests = state_approx_error(tanh_spec, McConfig(paths=4000, steps_per_year=100), 30.0, times[:-1])
        means = [e.mean for e in ests]
        bound = (tanh_spec.vol.alpha2**2 / (2 * 0.1)) ** 2 / 0.1**2
        assert all(np.isfinite(means)) and max(means) < bound
        assert means[-1] < max(means)
