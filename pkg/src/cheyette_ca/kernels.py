"""Malliavin / Girsanov kernels of the convexity-adjustment formulas.

Every kernel freezes the state at ``x = x0`` (the chosen ``xbar_0``) and
``y = ybar``.  The first time argument of each kernel is vectorised so that
kernels can be handed directly to the quadrature routines.

Notation
--------
``beta(s, t)``     ``exp(-int_s^t k) eta(s, x0, ybar_s)``, the conditional
                   expectation of ``D_s xbar_t`` under the bank-account measure.
``nu(s, T)``       ``eta(s, x0, ybar_s) G(s, T)``, the volatility of the ``T``-bond
                   and the Girsanov drift to the ``T``-forward measure.
``nu_bar(s, T)``   ``int_s^T eta(u, x0, ybar_u) du``.
``gamma``          Clark-Ocone integrand of ``int_{t0}^{t1} x_u du``.
``dm_bar``         damping of ``D_s xbar_t`` under a forward measure.
``sigma01``        annuity volatility with weights frozen at time zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .curves import SwapSchedule, df_ois
from .errors import DomainError, UsageError
from .model import CheyetteSpec, y_bar
from .quadrature import gauss_legendre


@dataclass(frozen=True)
class KernelContext:
    spec: CheyetteSpec
    x0: float = 0.0
    schedule: SwapSchedule | None = None

    def __post_init__(self):
        if not np.isfinite(self.x0):
            raise DomainError("x0 must be finite")

    def _y(self, s):
        return y_bar(self.spec, s) if self.spec.vol.uses_y else 0.0

    def eta(self, s):
        return self.spec.vol.eta(s, self.x0, self._y(s))

    def eta_dx(self, s):
        return self.spec.vol.eta_dx(s, self.x0, self._y(s))

    def eta_dxx(self, s):
        return self.spec.vol.eta_dxx(s, self.x0, self._y(s))

    def _require_schedule(self) -> SwapSchedule:
        if self.schedule is None:
            raise UsageError("this kernel needs a swap schedule in the context")
        return self.schedule

    @cached_property
    def annuity_weights(self) -> tuple[np.ndarray, np.ndarray]:
        """Funding dates ``t_i`` and frozen weights ``w_i(0) = delta_i P(0, t_i) / annuity(0)``."""
        sched = self._require_schedule()
        dates = np.asarray(sched.funding_dates[1:])
        dv = sched.funding_accruals * df_ois(self.spec.curve, 0.0, dates)
        return dates, dv / dv.sum()


def _ordered(s, t, what="s <= t"):
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(s > t):
        raise DomainError(f"kernel needs {what}")
    return s, t


def beta(ctx: KernelContext, s, t):
    s, t = _ordered(s, t)
    return ctx.spec.k.decay(s, t) * ctx.eta(s)


def nu(ctx: KernelContext, s, T):
    s, T = _ordered(s, T, "s <= T")
    return ctx.eta(s) * ctx.spec.k.G(s, T)


def nu_bar(ctx: KernelContext, t, tp):
    t, tp = _ordered(t, tp, "t <= tp")
    return gauss_legendre(ctx.eta, t, tp, ctx.spec.breakpoints)


def nu_bar_dx(ctx: KernelContext, t, tp):
    """``int_t^tp d eta / dx (u, x0, ybar_u) du``."""
    t, tp = _ordered(t, tp, "t <= tp")
    return gauss_legendre(ctx.eta_dx, t, tp, ctx.spec.breakpoints)


def gamma_kernel(ctx: KernelContext, s, t0, t1):
    """``eta(s, x0, ybar_s) int_{max(s, t0)}^{t1} exp(-int_s^u k) du``; zero for ``s >= t1``."""
    s = np.asarray(s, dtype=float)
    if not t0 < t1:
        raise DomainError("gamma kernel needs t0 < t1")
    m = np.minimum(np.maximum(s, t0), t1)
    sc = np.minimum(s, t1)
    return ctx.eta(sc) * ctx.spec.k.decay(sc, m) * ctx.spec.k.G(m, t1)


def dm_bar(ctx: KernelContext, s, t, tp):
    """``exp(-int_s^t exp(-int_u^t k) (eta_x nu_bar(u, tp) + eta nu_bar_x(u, tp)) du)``.

    Identically 1 when ``eta`` does not depend on ``x``.
    """
    s, t = _ordered(s, t)
    if t > tp:
        raise DomainError("dm_bar needs t <= tp")
    if ctx.spec.vol.time_dependent:
        return np.ones(np.shape(s))

    def integrand(u):
        return ctx.spec.k.decay(u, t) * (ctx.eta_dx(u) * nu_bar(ctx, u, tp) + ctx.eta(u) * nu_bar_dx(ctx, u, tp))

    return np.exp(-gauss_legendre(integrand, s, t, ctx.spec.breakpoints))


def sigma01_frozen(ctx: KernelContext, t):
    """``sum_i w_i(0) nu(t, t_i)`` over the funding dates."""
    dates, w = ctx.annuity_weights
    t = np.asarray(t, dtype=float)
    if np.any(t > ctx.schedule.ta):
        raise DomainError("sigma01 needs t <= t_a")
    return np.sum(w * nu(ctx, t[..., None], dates), axis=-1)


def annuity_mu(ctx: KernelContext, u, x=None):
    """``mu(u, x) = sum_i w_i(0) d eta / dx (u, x, ybar_u) G(u, t_i)``, the state sensitivity of ``sigma01``."""
    dates, w = ctx.annuity_weights
    u = np.asarray(u, dtype=float)
    x = ctx.x0 if x is None else x
    y = ctx._y(u)
    gsum = np.sum(w * ctx.spec.k.G(u[..., None], dates), axis=-1)
    return ctx.spec.vol.eta_dx(u, x, y) * gsum


def annuity_drift_exponent(ctx: KernelContext, s, ta):
    """``int_s^ta d/dx [beta(u, ta, x) mu(u, x)] |_{x = x0} du``; zero for time-dependent ``eta``."""
    dates, w = ctx.annuity_weights
    s, ta = _ordered(s, ta, "s <= ta")
    if ctx.spec.vol.time_dependent:
        return np.zeros(np.shape(s))

    def integrand(u):
        gsum = np.sum(w * ctx.spec.k.G(u[..., None], dates), axis=-1)
        return ctx.spec.k.decay(u, ta) * gsum * (ctx.eta_dx(u) ** 2 + ctx.eta(u) * ctx.eta_dxx(u))

    return gauss_legendre(integrand, s, ta, ctx.spec.breakpoints)
