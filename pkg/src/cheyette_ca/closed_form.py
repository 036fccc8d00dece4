"""Hull-White closed forms in the ``eta(t) = sigma exp(-k t)`` reduction.

With ``g(T) = exp(-k T)`` and ``h = sigma`` every kernel integral of the
adjusters has an elementary antiderivative.  Several of them cancel
catastrophically as ``k -> 0`` (``1/k^3`` terms of opposite sign), so for
``|k| >= TAYLOR_K`` they are evaluated in extended precision with mpmath and
below it with a fourth-order Taylor series in ``k``.

All functions accept ``k = 0``.
"""

from __future__ import annotations

import mpmath
import numpy as np

from .adjusters import (
    CaResult,
    Cms,
    FraInArrears,
    Future,
    OisFuture,
    _cms_result,
    _ois_result,
    fra_prefactor,
    futures_prefactor,
    solve_x0,
    swap_state_sensitivities,
)
from .curves import CurveSet, forward_rate
from .errors import DomainError
from .model import HullWhiteSpec

TAYLOR_K = 1e-6
MP_DPS = 50


def hw_G(k: float, t, T):
    """``(1 - exp(-k (T - t))) / k`` with its ``k -> 0`` limit ``T - t``."""
    tau = np.asarray(T, dtype=float) - np.asarray(t, dtype=float)
    if k == 0.0:
        return tau
    return -np.expm1(-k * tau) / k


def _mp(fn, *args) -> float:
    with mpmath.workdps(MP_DPS):
        return float(fn(*(mpmath.mpf(a) for a in args)))


def futures_time_integral(k: float, t0: float, t2: float) -> float:
    """``J = (1 - exp(-k t0)) / k^2 - t0 exp(-k t2) / k``.

    ``sigma^2 exp(-k t0) J`` is ``int_0^t0 beta(s, t0) nu(s, t2) ds``.
    """
    if abs(k) < TAYLOR_K:
        return (
            t0
            * (
                720 * t2
                - 360 * t0
                + 120 * k * (t0**2 - 3 * t2**2)
                + 30 * k**2 * (4 * t2**3 - t0**3)
                + 6 * k**3 * (t0**4 - 5 * t2**4)
                + k**4 * (6 * t2**5 - t0**5)
            )
            / 720
        )
    return _mp(lambda k, t0, t2: -mpmath.expm1(-k * t0) / k**2 - t0 * mpmath.exp(-k * t2) / k, k, t0, t2)


def _x_antiderivative_unit(k: float, t: float) -> float:
    """``int_0^t E[x_u] du / sigma^2 = (2kt + e^{2kt} - 4e^{kt} + 3) e^{-2kt} / (4k^3)``."""
    if abs(k) < TAYLOR_K:
        return t**3 / 6 - 5 * k * t**4 / 24 + 17 * k**2 * t**5 / 120 - 49 * k**3 * t**6 / 720 + 43 * k**4 * t**7 / 1680
    return _mp(
        lambda k, t: (2 * k * t + mpmath.exp(2 * k * t) - 4 * mpmath.exp(k * t) + 3) * mpmath.exp(-2 * k * t) / (4 * k**3),
        k,
        t,
    )


def integrated_x_drift_hw(sigma: float, k: float, t0: float, t1: float) -> float:
    """``int_{t0}^{t1} E^Q[x_u] du`` with ``E^Q[x_u] = sigma^2 int_0^u e^{-k(u-v)} v e^{-2kv} dv``."""
    return sigma**2 * (_x_antiderivative_unit(k, t1) - _x_antiderivative_unit(k, t0))


def gamma_variance_hw(sigma: float, k: float, t0: float, t1: float) -> float:
    """``int_0^{t1} Gamma(s, t0, t1)^2 ds``, the variance of ``int_{t0}^{t1} x_u du``."""
    if abs(k) < TAYLOR_K:
        a, b = t0, t1
        v = (
            2 * a**3 / 3
            - a**2 * b
            + b**3 / 3
            - k * (9 * a**4 - 8 * a**3 * b - 6 * a**2 * b**2 + 5 * b**4) / 12
            + k**2 * (28 * a**5 - 15 * a**4 * b - 20 * a**3 * b**2 - 10 * a**2 * b**3 + 17 * b**5) / 60
            + k**3
            * (-75 * a**6 + 24 * a**5 * b + 45 * a**4 * b**2 + 40 * a**3 * b**3 + 15 * a**2 * b**4 - 49 * b**6)
            / 360
            + k**4
            * (
                186 * a**7
                - 35 * a**6 * b
                - 84 * a**5 * b**2
                - 105 * a**4 * b**3
                - 70 * a**3 * b**4
                - 21 * a**2 * b**5
                + 129 * b**7
            )
            / 2520
        )
        return sigma**2 * v

    def exact(k, a, b):
        e = mpmath.exp
        num = (
            k * a * e(2 * k * b)
            - 2 * k * a * e(k * (a + b))
            + k * b * e(2 * k * a)
            + mpmath.mpf(3) / 2 * e(2 * k * a)
            + e(2 * k * b) / 2
            - 2 * e(k * (a + b))
        )
        return num * e(-2 * k * (a + b)) / k**3

    return sigma**2 * _mp(exact, k, t0, t1)


def fra_integral_beta_hw(sigma: float, k: float, t1: float, t2: float) -> float:
    """``int_0^t1 beta(s, t1) (nu_bar(s, t2) - nu_bar(s, t1)) ds = sigma^2 t1 e^{-k t1} G(t1, t2) e^{-k t1}``."""
    return float(sigma**2 * t1 * np.exp(-2 * k * t1) * hw_G(k, t1, t2))


def fra_integral_eta_hw(sigma: float, k: float, t1: float, t2: float) -> float:
    """``sigma^2 / k int_0^t1 (e^{-k(t1+u)} - e^{-k(t2+u)}) du = sigma^2 e^{-k t1} G(t1, t2) G(0, t1)``."""
    return float(sigma**2 * np.exp(-k * t1) * hw_G(k, t1, t2) * hw_G(k, 0.0, t1))


def cms_integral_hw(sigma: float, k: float, ta: float) -> float:
    """``int_0^ta beta(s, ta)^2 ds = sigma^2 ta e^{-2 k ta}``, which is also ``ybar(ta)``."""
    return float(sigma**2 * ta * np.exp(-2 * k * ta))


def _check(hw: HullWhiteSpec):
    if hw.sigma < 0:
        raise DomainError("sigma must be non-negative")


def ca_future_hw(hw: HullWhiteSpec, curve: CurveSet, p: Future) -> CaResult:
    _check(hw)
    pref = futures_prefactor(curve, lambda t, T: hw_G(hw.k, t, T), p)
    integral = hw.sigma**2 * np.exp(-hw.k * p.t0) * futures_time_integral(hw.k, p.t0, p.t2)
    base = float(forward_rate(curve, 0.0, p.t1, p.t2))
    ca = pref * integral
    return CaResult(ca, base, base + ca, "hull_white_closed_form", diagnostics={"integral": integral})


def ca_ois_future_hw(hw: HullWhiteSpec, curve: CurveSet, p: OisFuture) -> CaResult:
    _check(hw)
    log_ratio = float(curve.ois.log_df(p.t0) - curve.ois.log_df(p.t1))
    variance = gamma_variance_hw(hw.sigma, hw.k, p.t0, p.t1)
    expected_I = log_ratio + integrated_x_drift_hw(hw.sigma, hw.k, p.t0, p.t1)
    return _ois_result(curve, p, expected_I, 0.5 * variance, "hull_white_closed_form", 0.0, {"variance": variance})


def ca_fra_arrears_hw(hw: HullWhiteSpec, curve: CurveSet, p: FraInArrears, variant: str = "beta") -> CaResult:
    _check(hw)
    pref = fra_prefactor(curve, lambda t, T: hw_G(hw.k, t, T), p)
    if variant == "beta":
        integral = fra_integral_beta_hw(hw.sigma, hw.k, p.t1, p.t2)
    elif variant == "eta":
        integral = fra_integral_eta_hw(hw.sigma, hw.k, p.t1, p.t2)
    else:
        raise DomainError(f"unknown FRA variant {variant!r}")
    base = float(forward_rate(curve, 0.0, p.t1, p.t2))
    ca = pref * integral
    return CaResult(ca, base, base + ca, "hull_white_closed_form", 0.0, variant, {"integral": integral})


def ca_cms_hw(hw: HullWhiteSpec, curve: CurveSet, p: Cms) -> CaResult:
    _check(hw)
    G_fn = lambda t, T: hw_G(hw.k, t, T)  # noqa: E731
    y_ta = cms_integral_hw(hw.sigma, hw.k, p.ta)
    x0 = solve_x0(curve, G_fn, p.schedule, y_ta)
    sens = swap_state_sensitivities(curve, G_fn, p.schedule, x0, y_ta)
    return _cms_result(curve, p, sens, y_ta, x0, "hull_white_closed_form", 0.0)


def convexity_adjustment_hw(hw: HullWhiteSpec, curve: CurveSet, p, **kw) -> CaResult:
    if isinstance(p, Future):
        return ca_future_hw(hw, curve, p)
    if isinstance(p, OisFuture):
        return ca_ois_future_hw(hw, curve, p)
    if isinstance(p, FraInArrears):
        return ca_fra_arrears_hw(hw, curve, p, **kw)
    if isinstance(p, Cms):
        return ca_cms_hw(hw, curve, p)
    raise DomainError(f"unsupported product {type(p).__name__}")
