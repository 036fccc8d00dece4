"""Convexity adjustments for futures, OIS futures, FRAs in arrears and CMS.

Every adjuster follows the same measure-change template: the expectation of a
payoff under one measure equals its value under another plus
``int_0^t E_s[f'(x_t) D_s x_t] lambda_s ds``, with ``lambda`` the Girsanov
drift between the two measures.  The conditional Malliavin derivatives are
replaced by the deterministic kernels of :mod:`cheyette_ca.kernels`, which
leaves one-dimensional time integrals evaluated with adaptive Simpson.

Sign conventions
----------------
``adjustment`` is always ``adjusted_rate - base_rate`` where ``base_rate`` is
the rate computed from today's curves:

* futures: futures rate minus the forward ``L_E(0, t1, t2)``;
* OIS futures: expected compounded (or averaged) rate minus its curve value;
* FRA in arrears: ``E^{t1}[L]`` minus the forward;
* CMS: ``E^{t_p}[S_{a,b}(t_a)]`` minus ``S_{a,b}(0)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy.optimize import bisect

from .curves import CurveSet, SwapSchedule, annuity, df_estimation, df_ois, forward_rate, swap_rates
from .errors import DomainError, NumericError
from .kernels import KernelContext, annuity_drift_exponent, beta, dm_bar, gamma_kernel, nu, nu_bar
from .model import CheyetteSpec, expected_integrated_short_rate, y_bar
from .quadrature import QuadResult, adaptive_simpson

QUAD_TOL = 1e-12
QUAD_MAX_DEPTH = 40
ROOT_BRACKET = (-0.5, 0.5)
ROOT_TOL = 1e-12


# --------------------------------------------------------------------------- products


@dataclass(frozen=True)
class Future:
    """Futures on the estimation-curve rate over ``[t1, t2]``, expiring at ``t0``."""

    t0: float
    t1: float
    t2: float

    def __post_init__(self):
        if not 0 <= self.t0 <= self.t1 < self.t2:
            raise DomainError(f"futures need 0 <= t0 <= t1 < t2, got {self.t0}, {self.t1}, {self.t2}")

    @property
    def delta(self) -> float:
        return self.t2 - self.t1


@dataclass(frozen=True)
class OisFuture:
    """Overnight-rate future over ``[t0, t1]``, compounded or averaged."""

    t0: float
    t1: float
    mode: Literal["compounding", "average"] = "compounding"

    def __post_init__(self):
        if not 0 <= self.t0 < self.t1:
            raise DomainError(f"OIS futures need 0 <= t0 < t1, got {self.t0}, {self.t1}")
        if self.mode not in ("compounding", "average"):
            raise DomainError(f"unknown OIS future mode {self.mode!r}")

    @property
    def delta(self) -> float:
        return self.t1 - self.t0


@dataclass(frozen=True)
class FraInArrears:
    """FRA fixing and paying at ``t1`` on the rate over ``[t1, t2]``."""

    t1: float
    t2: float

    def __post_init__(self):
        if not 0 <= self.t1 < self.t2:
            raise DomainError(f"FRA in arrears needs 0 <= t1 < t2, got {self.t1}, {self.t2}")

    @property
    def delta(self) -> float:
        return self.t2 - self.t1


@dataclass(frozen=True)
class Cms:
    """Swap rate fixing at ``t_a`` on ``schedule`` and paid at ``schedule.payment_date``."""

    schedule: SwapSchedule

    @property
    def ta(self) -> float:
        return self.schedule.ta

    @property
    def tb(self) -> float:
        return self.schedule.tb

    @property
    def tp(self) -> float:
        return self.schedule.payment_date

    @classmethod
    def regular(cls, start: float, tenor: float, frequency: int = 1, payment_lag: float | None = None) -> "Cms":
        """``payment_lag`` is measured from ``start``; ``None`` pays on the first period end."""
        tp = None if payment_lag is None else start + payment_lag
        return cls(SwapSchedule.regular(start, tenor, frequency, tp))


Product = Future | OisFuture | FraInArrears | Cms


@dataclass(frozen=True)
class CaResult:
    adjustment: float
    base_rate: float
    adjusted_rate: float
    method: Literal["generic", "hull_white_closed_form"]
    quadrature_error_estimate: float = 0.0
    variant: str = "beta"
    diagnostics: dict = field(default_factory=dict, compare=False)


# --------------------------------------------------------------------------- template


def measure_change_adjustment(
    sensitivity: Callable[[np.ndarray], np.ndarray],
    drift: Callable[[np.ndarray], np.ndarray],
    horizon: float,
    points=(),
) -> QuadResult:
    """``int_0^horizon sensitivity(s) * drift(s) ds``.

    ``sensitivity`` stands for ``E_s[f'(x_t) D_s x_t]`` and ``drift`` for the
    Girsanov drift between the two measures.  A zero drift gives a zero
    adjustment.
    """
    if horizon < 0:
        raise DomainError("horizon must be non-negative")
    return adaptive_simpson(
        lambda s: sensitivity(s) * drift(s),
        0.0,
        horizon,
        tol=QUAD_TOL,
        max_depth=QUAD_MAX_DEPTH,
        points=points,
    )


def _integrate(f, a, b, points=()) -> QuadResult:
    return adaptive_simpson(f, a, b, tol=QUAD_TOL, max_depth=QUAD_MAX_DEPTH, points=points)


# --------------------------------------------------------------------------- futures


def futures_prefactor(curve: CurveSet, spec_G: Callable, p: Future) -> float:
    """``P_E(0, t1) / (delta P_E(0, t2)) * (G(t0, t2) - G(t0, t1))``."""
    ratio = df_estimation(curve, 0.0, p.t1) / df_estimation(curve, 0.0, p.t2)
    return float(ratio / p.delta * (spec_G(p.t0, p.t2) - spec_G(p.t0, p.t1)))


def ca_future(spec: CheyetteSpec, p: Future, x0: float = 0.0) -> CaResult:
    ctx = KernelContext(spec, x0)
    pref = futures_prefactor(spec.curve, spec.k.G, p)
    q = measure_change_adjustment(
        lambda s: beta(ctx, s, p.t0), lambda s: nu(ctx, s, p.t2), p.t0, spec.breakpoints
    )
    base = float(forward_rate(spec.curve, 0.0, p.t1, p.t2))
    ca = pref * q.value
    return CaResult(ca, base, base + ca, "generic", abs(pref) * q.error, diagnostics={"integral": q.value})


# --------------------------------------------------------------------------- OIS futures


def ois_compounded_rate(expected_I: float, half_var: float, delta: float) -> float:
    """``(exp(E[I] + V/2) - 1) / delta`` with ``V`` the variance of ``I``."""
    return float(np.expm1(expected_I + half_var) / delta)


def ois_average_rate(compounded: float, half_var: float, delta: float) -> float:
    """``(log(1 + delta R) - V/2) / delta``."""
    return float((np.log1p(delta * compounded) - half_var) / delta)


def _ois_result(curve: CurveSet, p: OisFuture, expected_I: float, half_var: float, method, err, diag) -> CaResult:
    log_ratio = float(curve.ois.log_df(p.t0) - curve.ois.log_df(p.t1))
    compounded = ois_compounded_rate(expected_I, half_var, p.delta)
    if p.mode == "compounding":
        base = float(np.expm1(log_ratio) / p.delta)
        adjusted = compounded
    else:
        base = log_ratio / p.delta
        adjusted = ois_average_rate(compounded, half_var, p.delta)
    diag = {"expected_I": expected_I, "half_variance": half_var, **diag}
    return CaResult(adjusted - base, base, adjusted, method, err, diagnostics=diag)


def ca_ois_future(spec: CheyetteSpec, p: OisFuture, x0: float = 0.0) -> CaResult:
    ctx = KernelContext(spec, x0)
    pts = sorted(set(spec.breakpoints) | {p.t0})
    q = _integrate(lambda s: gamma_kernel(ctx, s, p.t0, p.t1) ** 2, 0.0, p.t1, pts)
    expected_I = float(expected_integrated_short_rate(spec, p.t0, p.t1))
    half_var = 0.5 * q.value
    err = 0.5 * q.error * max(1.0, np.exp(expected_I + half_var)) / p.delta
    return _ois_result(spec.curve, p, expected_I, half_var, "generic", err, {"variance": q.value})


# --------------------------------------------------------------------------- FRA in arrears


def fra_prefactor(curve: CurveSet, spec_G: Callable, p: FraInArrears) -> float:
    """``G(t1, t2) P_E(0, t1) / (delta P_E(0, t2))``."""
    ratio = df_estimation(curve, 0.0, p.t1) / df_estimation(curve, 0.0, p.t2)
    return float(spec_G(p.t1, p.t2) * ratio / p.delta)


def ca_fra_arrears(
    spec: CheyetteSpec,
    p: FraInArrears,
    variant: Literal["beta", "eta"] = "beta",
    x0: float = 0.0,
) -> CaResult:
    """FRA-in-arrears adjustment.

    ``variant="beta"`` integrates ``beta(s, t1) DM(s, t1) (nu_bar(s, t2) - nu_bar(s, t1))``;
    ``variant="eta"`` replaces ``beta(s, t1)`` by ``eta(s, x0, ybar_s)``,
    a common simplification for Hull-White.
    """
    ctx = KernelContext(spec, x0)
    pref = fra_prefactor(spec.curve, spec.k.G, p)
    if variant == "beta":
        sens = lambda s: beta(ctx, s, p.t1) * dm_bar(ctx, s, p.t1, p.t2)  # noqa: E731
    elif variant == "eta":
        sens = lambda s: ctx.eta(s) * dm_bar(ctx, s, p.t1, p.t2)  # noqa: E731
    else:
        raise DomainError(f"unknown FRA variant {variant!r}")
    q = measure_change_adjustment(sens, lambda s: nu_bar(ctx, s, p.t2) - nu_bar(ctx, s, p.t1), p.t1, spec.breakpoints)
    base = float(forward_rate(spec.curve, 0.0, p.t1, p.t2))
    ca = pref * q.value
    return CaResult(ca, base, base + ca, "generic", abs(pref) * q.error, variant, {"integral": q.value})


def natural_forward_rate(curve: CurveSet, p: Product) -> float:
    """Expectation of the fixing under the measure that makes it a martingale.

    For futures and FRAs this is ``E^{t2}[L_E(t_f, t1, t2)]`` with ``t_f`` the
    fixing date.  The basis spread depends on tenor, so ``H(t_f, .)`` differs
    from ``H(0, .)`` and the result departs from the curve forward whenever
    the spread is not constant.  OIS futures and CMS use their base rates.
    """
    if isinstance(p, (Future, FraInArrears)):
        tf = p.t0 if isinstance(p, Future) else p.t1
        h = curve.H(tf, p.t1) / curve.H(tf, p.t2)
        return float((h * df_ois(curve, 0.0, p.t1) / df_ois(curve, 0.0, p.t2) - 1.0) / p.delta)
    if isinstance(p, OisFuture):
        log_ratio = float(curve.ois.log_df(p.t0) - curve.ois.log_df(p.t1))
        return float(np.expm1(log_ratio) / p.delta) if p.mode == "compounding" else log_ratio / p.delta
    if isinstance(p, Cms):
        return float(swap_rates(curve, p.schedule, 0.0).S_ab)
    raise DomainError(f"unsupported product {type(p).__name__}")


# --------------------------------------------------------------------------- CMS


@dataclass(frozen=True)
class SwapSensitivities:
    """OIS swap rate and payment ratio ``M = P(t_a, t_p) / annuity(t_a)`` with their ``x`` derivatives."""

    S: float
    dS: float
    M: float
    dM: float


def swap_state_sensitivities(curve: CurveSet, G_fn: Callable, sched: SwapSchedule, x: float, y: float) -> SwapSensitivities:
    """Evaluate ``S_ois(t_a, x, y)``, ``M(t_a, t_p, x, y)`` and their exact ``x`` derivatives.

    Bonds follow ``P = P(0, T)/P(0, t_a) exp(-G x - G^2 y / 2)`` so ``dP/dx = -G P``.
    """
    ta = sched.ta
    dates = np.asarray(sched.funding_dates[1:])
    delta = sched.funding_accruals

    def bond(T):
        g = G_fn(ta, T)
        return g, df_ois(curve, ta, T) * np.exp(-g * x - 0.5 * g * g * y)

    g_j, p_j = bond(dates)
    g_b, p_b = g_j[-1], p_j[-1]
    g_p, p_p = bond(sched.payment_date)
    A = float(np.sum(delta * p_j))
    dA = -float(np.sum(delta * g_j * p_j))
    N = 1.0 - p_b
    S = N / A
    dS = (g_b * p_b * A - N * dA) / A**2
    M = float(p_p) / A
    dM = (-g_p * p_p * A - p_p * dA) / A**2
    return SwapSensitivities(float(S), float(dS), float(M), float(dM))


def solve_x0(curve: CurveSet, G_fn: Callable, sched: SwapSchedule, y: float) -> float:
    """State ``x`` at which ``S_ois(t_a, x, y)`` equals today's OIS swap rate (bisection)."""
    target = swap_rates(curve, sched, 0.0).S_ois

    def f(x):
        return swap_state_sensitivities(curve, G_fn, sched, x, y).S - target

    lo, hi = ROOT_BRACKET
    f_lo, f_hi = f(lo), f(hi)
    if not np.sign(f_lo) * np.sign(f_hi) <= 0:
        raise NumericError(f"x0 root not bracketed on [{lo}, {hi}]: f(lo)={f_lo:.3e}, f(hi)={f_hi:.3e}")
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    return float(bisect(f, lo, hi, xtol=ROOT_TOL, maxiter=200))


def _cms_result(curve: CurveSet, p: Cms, sens: SwapSensitivities, integral: float, x0: float, method, err) -> CaResult:
    rates = swap_rates(curve, p.schedule, 0.0)
    m0 = float(df_ois(curve, 0.0, p.tp)) / annuity(curve, p.schedule, 0.0)
    factor = sens.dS * sens.dM / m0
    ca = factor * integral
    adjusted = rates.S_ois + ca + rates.frozen_spread
    diag = {
        "x0": x0,
        "dS": sens.dS,
        "dM": sens.dM,
        "M0": m0,
        "integral": integral,
        "S_ois": rates.S_ois,
        "frozen_spread": rates.frozen_spread,
    }
    return CaResult(ca, rates.S_ab, adjusted, method, abs(factor) * err, diagnostics=diag)


def ca_cms(spec: CheyetteSpec, p: Cms) -> CaResult:
    sched = p.schedule
    y_ta = float(y_bar(spec, sched.ta))
    x0 = solve_x0(spec.curve, spec.k.G, sched, y_ta)
    sens = swap_state_sensitivities(spec.curve, spec.k.G, sched, x0, y_ta)
    ctx = KernelContext(spec, x0, sched)

    def integrand(s):
        return beta(ctx, s, sched.ta) ** 2 * np.exp(-2.0 * annuity_drift_exponent(ctx, s, sched.ta))

    q = _integrate(integrand, 0.0, sched.ta, spec.breakpoints)
    return _cms_result(spec.curve, p, sens, q.value, x0, "generic", q.error)


def convexity_adjustment(spec: CheyetteSpec, p: Product, **kw) -> CaResult:
    """Dispatch on the product type."""
    if isinstance(p, Future):
        return ca_future(spec, p, **kw)
    if isinstance(p, OisFuture):
        return ca_ois_future(spec, p, **kw)
    if isinstance(p, FraInArrears):
        return ca_fra_arrears(spec, p, **kw)
    if isinstance(p, Cms):
        return ca_cms(spec, p, **kw)
    raise DomainError(f"unsupported product {type(p).__name__}")
