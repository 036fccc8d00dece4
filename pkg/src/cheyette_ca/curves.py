"""Deterministic two-curve world: OIS discounting plus a basis-shifted estimation curve.

Conventions
-----------
* Times are year fractions and the accrual of a period is ``t2 - t1``.
* The OIS curve is either flat or given by zero-rate knots, interpolated
  log-linearly in discount factors; beyond the last knot the last zero rate
  is held flat, before the first knot the first zero rate is used.
* The basis spread ``s0(u)`` is a piecewise-constant function of tenor and is
  time-homogeneous: ``s(t, t + u) = s0(u)``.  Hence
  ``H(t, T) = exp(-int_0^{T-t} s0(v) dv)`` and ``P_E(t, T) = H(t, T) P_ois(t, T)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DomainError, NumericError


def year_fraction(t1, t2):
    return np.asarray(t2, dtype=float) - np.asarray(t1, dtype=float)


@dataclass(frozen=True)
class DiscountCurve:
    """OIS discount curve ``P_ois(0, T)``.

    Build with :meth:`flat` or :meth:`from_knots`.
    """

    times: tuple[float, ...]
    zero_rates: tuple[float, ...]

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size == 0 or t.size != len(self.zero_rates):
            raise DomainError("curve needs matching, non-empty times and zero rates")
        if np.any(t <= 0) or np.any(np.diff(t) <= 0):
            raise DomainError("curve knot times must be positive and strictly increasing")

    @classmethod
    def flat(cls, rate: float) -> "DiscountCurve":
        return cls((1.0,), (float(rate),))

    @classmethod
    def from_knots(cls, knots: Sequence[Sequence[float]]) -> "DiscountCurve":
        knots = sorted((float(t), float(r)) for t, r in knots)
        return cls(tuple(t for t, _ in knots), tuple(r for _, r in knots))

    @property
    def is_flat(self) -> bool:
        return len(self.times) == 1

    @cached_property
    def _log_df(self) -> np.ndarray:
        return -np.asarray(self.zero_rates) * np.asarray(self.times)

    def log_df(self, T) -> np.ndarray:
        """``log P_ois(0, T)``; vectorised in ``T``."""
        T = np.asarray(T, dtype=float)
        if np.any(T < 0):
            raise DomainError("maturity must be non-negative")
        times = np.asarray(self.times)
        zr = np.asarray(self.zero_rates)
        # first knot: log-linear from (0, 0); after last knot: flat zero rate
        inner = np.interp(T, np.concatenate([[0.0], times]), np.concatenate([[0.0], self._log_df]))
        return np.where(T > times[-1], -zr[-1] * T, inner)

    def df(self, T) -> np.ndarray:
        return np.exp(self.log_df(T))

    def inst_forward(self, t) -> np.ndarray:
        """Instantaneous forward ``f_ois(0, t)`` (right derivative on knots)."""
        t = np.asarray(t, dtype=float)
        times = np.concatenate([[0.0], np.asarray(self.times)])
        logs = np.concatenate([[0.0], self._log_df])
        slopes = -np.diff(logs) / np.diff(times)
        idx = np.searchsorted(times, t, side="right") - 1
        return np.where(idx >= slopes.size, self.zero_rates[-1], slopes[np.clip(idx, 0, slopes.size - 1)])


@dataclass(frozen=True)
class BasisSpread:
    """Piecewise-constant basis spread ``s0(u)`` by tenor.

    ``pieces`` holds ``(start_tenor, spread)`` pairs; the spread applies from its
    start tenor up to the next one and the last spread extends to infinity.
    Tenors before the first start carry zero spread.
    """

    pieces: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        starts = [p[0] for p in self.pieces]
        if any(s < 0 for s in starts) or any(b <= a for a, b in zip(starts, starts[1:])):
            raise DomainError("basis tenors must be non-negative and strictly increasing")

    @classmethod
    def zero(cls) -> "BasisSpread":
        return cls(())

    @classmethod
    def constant(cls, spread: float) -> "BasisSpread":
        return cls(((0.0, float(spread)),))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "BasisSpread":
        return cls(tuple(sorted((float(u), float(s)) for u, s in pairs)))

    @property
    def is_zero(self) -> bool:
        return all(s == 0.0 for _, s in self.pieces)

    def spread(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if not self.pieces:
            return np.zeros_like(u)
        starts = np.array([p[0] for p in self.pieces])
        values = np.array([p[1] for p in self.pieces])
        idx = np.searchsorted(starts, u, side="right") - 1
        return np.where(idx < 0, 0.0, values[np.clip(idx, 0, None)])

    def integral(self, tau) -> np.ndarray:
        """``int_0^tau s0(v) dv``, exact on the constant pieces."""
        tau = np.asarray(tau, dtype=float)
        out = np.zeros_like(tau)
        starts = [p[0] for p in self.pieces] + [np.inf]
        for (start, s), end in zip(self.pieces, starts[1:]):
            out = out + s * np.clip(np.minimum(tau, end) - start, 0.0, None)
        return out


@dataclass(frozen=True)
class SwapSchedule:
    """Estimation and funding legs of a swap starting at ``t_a`` and ending at ``t_b``.

    ``payment_date`` is the CMS payment date ``t_p`` with ``t_a < t_p <= t_b``.
    """

    estimation_dates: tuple[float, ...]
    funding_dates: tuple[float, ...]
    payment_date: float

    def __post_init__(self):
        for name, dates in (("estimation", self.estimation_dates), ("funding", self.funding_dates)):
            if len(dates) < 2:
                raise DomainError(f"{name} leg needs at least one period")
            if any(b <= a for a, b in zip(dates, dates[1:])):
                raise DomainError(f"{name} dates must be strictly increasing")
        if self.estimation_dates[0] != self.funding_dates[0] or self.estimation_dates[-1] != self.funding_dates[-1]:
            raise DomainError("estimation and funding legs must share start and end dates")
        if not self.ta < self.payment_date <= self.tb:
            raise DomainError("payment date must satisfy t_a < t_p <= t_b")

    @classmethod
    def regular(cls, start: float, tenor: float, frequency: int = 1, payment_date: float | None = None) -> "SwapSchedule":
        """Same-frequency legs; the payment date defaults to the first period end."""
        n = int(round(tenor * frequency))
        if n < 1 or abs(n / frequency - tenor) > 1e-12:
            raise DomainError("tenor must be a whole number of periods")
        dates = tuple(start + i / frequency for i in range(n + 1))
        return cls(dates, dates, dates[1] if payment_date is None else payment_date)

    @property
    def ta(self) -> float:
        return self.funding_dates[0]

    @property
    def tb(self) -> float:
        return self.funding_dates[-1]

    @property
    def funding_accruals(self) -> np.ndarray:
        return np.diff(np.asarray(self.funding_dates))

    @property
    def estimation_accruals(self) -> np.ndarray:
        return np.diff(np.asarray(self.estimation_dates))


@dataclass(frozen=True)
class CurveSet:
    ois: DiscountCurve
    basis: BasisSpread = field(default_factory=BasisSpread.zero)

    @classmethod
    def flat(cls, rate: float, spread: float = 0.0) -> "CurveSet":
        basis = BasisSpread.constant(spread) if spread else BasisSpread.zero()
        return cls(DiscountCurve.flat(rate), basis)

    @classmethod
    def from_json(cls, text: str) -> "CurveSet":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_dict(cls, block: dict) -> "CurveSet":
        if "flat_rate" in block:
            ois = DiscountCurve.flat(float(block["flat_rate"]))
        elif "knots" in block:
            ois = DiscountCurve.from_knots(block["knots"])
        else:
            raise DomainError("curve block needs 'flat_rate' or 'knots'")
        basis = BasisSpread.from_pairs(block.get("basis", []))
        return cls(ois, basis)

    def H(self, t, T) -> np.ndarray:
        t, T = _check_order(t, T)
        return np.exp(-self.basis.integral(T - t))


def _check_order(t, T):
    t = np.asarray(t, dtype=float)
    T = np.asarray(T, dtype=float)
    if np.any(t < 0) or np.any(T < t):
        raise DomainError("need 0 <= t <= T")
    return t, T


def df_ois(curve: CurveSet, t, T):
    """Deterministic OIS discount factor ``P_ois(t, T) = P(0, T) / P(0, t)``."""
    t, T = _check_order(t, T)
    return np.exp(curve.ois.log_df(T) - curve.ois.log_df(t))


def df_estimation(curve: CurveSet, t, T):
    """Estimation-curve discount factor ``H(t, T) P_ois(t, T)``."""
    return curve.H(t, T) * df_ois(curve, t, T)


def forward_rate(curve: CurveSet, t0, t1, t2):
    """Simple forward rate on the estimation curve seen at ``t0`` for ``[t1, t2]``."""
    t0, t1, t2 = (np.asarray(v, dtype=float) for v in (t0, t1, t2))
    if np.any(t1 >= t2):
        raise DomainError("forward period needs t1 < t2")
    if np.any(t0 > t1):
        raise DomainError("need t0 <= t1")
    return (df_estimation(curve, t0, t1) / df_estimation(curve, t0, t2) - 1.0) / (t2 - t1)


def annuity(curve: CurveSet, sched: SwapSchedule, t: float = 0.0) -> float:
    """Funding-leg annuity ``sum_j delta_j P_ois(t, t_j)``."""
    if t > sched.ta:
        raise DomainError("annuity is defined for t <= t_a")
    dates = np.asarray(sched.funding_dates[1:])
    return float(np.sum(sched.funding_accruals * df_ois(curve, t, dates)))


def frozen_basis_spread(curve: CurveSet, sched: SwapSchedule) -> float:
    """Basis contribution to the swap rate, frozen with time-zero curves.

    ``sum_i delta_i alpha(0, t_{i-1}, t_i) P_ois(0, t_i) / annuity(0)`` with
    ``alpha = (H(0, t_{i-1}) / H(0, t_i) - 1) / delta_i``.
    """
    if curve.basis.is_zero:
        return 0.0
    est = np.asarray(sched.estimation_dates)
    h = curve.H(0.0, est)
    alpha_delta = h[:-1] / h[1:] - 1.0
    return float(np.sum(alpha_delta * curve.ois.df(est[1:])) / annuity(curve, sched, 0.0))


@dataclass(frozen=True)
class SwapRates:
    S_ab: float
    S_ois: float
    frozen_spread: float

    def __iter__(self):
        return iter((self.S_ab, self.S_ois, self.frozen_spread))


def swap_rates(curve: CurveSet, sched: SwapSchedule, t: float = 0.0) -> SwapRates:
    """Estimation swap rate, OIS swap rate and frozen basis spread at time ``t``."""
    a = annuity(curve, sched, t)
    if not a > 0:
        raise NumericError(f"non-positive annuity {a}")
    s_ois = float((df_ois(curve, t, sched.ta) - df_ois(curve, t, sched.tb)) / a)
    spread = frozen_basis_spread(curve, sched)
    return SwapRates(s_ois + spread, s_ois, spread)
