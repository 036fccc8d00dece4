"""One-factor Cheyette model.

State dynamics under the bank-account measure::

    dx = (-k(t) x + y) dt + eta(t, x, y) dW,     x(0) = 0
    dy = (eta(t, x, y)^2 - 2 k(t) y) dt,         y(0) = 0

with OIS bonds reconstructed as::

    P(t, T, x, y) = P(0, T) / P(0, t) * exp(-G(t, T) x - G(t, T)^2 y / 2)
    G(t, T) = int_t^T exp(-int_t^u k) du

The Hull-White reduction used throughout follows ``g(T) = exp(-k T)`` and
``h(t) = sigma``, so ``sigma(t, T) = sigma exp(-k T)`` and
``eta(t) = sigma exp(-k t)``.  This is *not* the textbook parameterisation
``sigma(t, T) = sigma exp(-k (T - t))`` (which corresponds to ``eta = sigma``);
see :func:`textbook_hull_white_volatility` for that one.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .curves import CurveSet
from .errors import DomainError
from .quadrature import gauss_legendre

FD_REL_STEP = 1e-6


@dataclass(frozen=True)
class MeanReversion:
    """Piecewise-constant mean reversion ``k(t)``.

    ``values[j]`` applies on ``[times[j], times[j+1])``; the last value extends
    to infinity.  ``times[0]`` must be 0.
    """

    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.values) or not self.times:
            raise DomainError("mean reversion needs matching, non-empty times and values")
        if self.times[0] != 0.0 or any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise DomainError("mean reversion times must start at 0 and increase")
        if any(not v > 0 for v in self.values):
            raise DomainError("mean reversion must be positive")

    @classmethod
    def constant(cls, k: float) -> "MeanReversion":
        return cls((0.0,), (float(k),))

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[float]]) -> "MeanReversion":
        pairs = sorted((float(t), float(v)) for t, v in pairs)
        return cls(tuple(t for t, _ in pairs), tuple(v for _, v in pairs))

    @property
    def is_constant(self) -> bool:
        return len(self.values) == 1

    @property
    def lower_bound(self) -> float:
        return min(self.values)

    @property
    def upper_bound(self) -> float:
        return max(self.values)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.times[1:]

    @cached_property
    def _cum_knots(self) -> np.ndarray:
        t = np.asarray(self.times)
        v = np.asarray(self.values)
        return np.concatenate([[0.0], np.cumsum(v[:-1] * np.diff(t))])

    def cumulative(self, t) -> np.ndarray:
        """``int_0^t k(w) dw``."""
        t = np.asarray(t, dtype=float)
        times = np.asarray(self.times)
        idx = np.clip(np.searchsorted(times, t, side="right") - 1, 0, None)
        return self._cum_knots[idx] + np.asarray(self.values)[idx] * (t - times[idx])

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        idx = np.clip(np.searchsorted(np.asarray(self.times), t, side="right") - 1, 0, None)
        return np.asarray(self.values)[idx]

    def decay(self, a, b) -> np.ndarray:
        """``exp(-int_a^b k)``."""
        return np.exp(-(self.cumulative(b) - self.cumulative(a)))

    def accumulation(self, t) -> np.ndarray:
        """``exp(int_0^t k)``, the reciprocal of ``g(t)``."""
        return np.exp(self.cumulative(t))

    def G(self, t, T) -> np.ndarray:
        """``int_t^T exp(-int_t^u k) du``, evaluated exactly segment by segment."""
        t, T = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(T, dtype=float))
        times = list(self.times) + [np.inf]
        out = np.zeros(t.shape)
        cum_t = self.cumulative(t)
        for (start, end), k in zip(zip(times[:-1], times[1:]), self.values):
            lo = np.clip(t, start, end)
            hi = np.clip(T, start, end)
            width = np.clip(hi - lo, 0.0, None)
            if not np.any(width > 0):
                continue
            # int_lo^hi exp(-(Lambda(u) - Lambda(t))) du on a constant-k piece
            out = out + np.exp(-(self.cumulative(lo) - cum_t)) * (-np.expm1(-k * width) / k)
        return out


class Volatility:
    """Base class for the Cheyette local volatility ``eta(t, x, y)``.

    Subclasses must accept numpy arrays for all three arguments.
    """

    time_dependent: bool = False
    uses_y: bool = True
    breakpoints: tuple[float, ...] = ()
    alpha1: float | None = None
    alpha2: float | None = None

    def eta(self, t, x, y):
        raise NotImplementedError

    def eta_dx(self, t, x, y):
        h = FD_REL_STEP * np.maximum(1.0, np.abs(x))
        return (self.eta(t, x + h, y) - self.eta(t, x - h, y)) / (2 * h)

    def eta_dxx(self, t, x, y):
        h = 1e-4 * np.maximum(1.0, np.abs(x))
        return (self.eta(t, x + h, y) - 2 * self.eta(t, x, y) + self.eta(t, x - h, y)) / (h * h)

    @property
    def derivative_source(self) -> str:
        return "finite_difference"


@dataclass(frozen=True, eq=False)
class TimeDependentVol(Volatility):
    """``eta`` depending on time only; all state partials vanish."""

    fn: Callable[[np.ndarray], np.ndarray]
    breakpoints: tuple[float, ...] = ()
    time_dependent = True
    uses_y = False

    def eta(self, t, x=0.0, y=0.0):
        t = np.asarray(t, dtype=float)
        shape = np.broadcast_shapes(t.shape, np.shape(x), np.shape(y))
        return np.broadcast_to(self.fn(t), shape).astype(float)

    def eta_dx(self, t, x=0.0, y=0.0):
        return np.zeros(np.broadcast_shapes(np.shape(t), np.shape(x), np.shape(y)))

    def eta_dxx(self, t, x=0.0, y=0.0):
        return self.eta_dx(t, x, y)

    @property
    def derivative_source(self) -> str:
        return "analytic"


@dataclass(frozen=True, eq=False)
class StateDependentVol(Volatility):
    """General ``eta(t, x, y)``.

    Analytic ``dx`` / ``dxx`` partials are used when given, otherwise central
    finite differences.  ``alpha1``/``alpha2`` are the volatility bounds and
    ``lipschitz`` the state Lipschitz constant; they are informational and
    checked by :meth:`check_bounds`.
    """

    fn: Callable[..., np.ndarray]
    dx: Callable[..., np.ndarray] | None = None
    dxx: Callable[..., np.ndarray] | None = None
    alpha1: float | None = None
    alpha2: float | None = None
    lipschitz: float | None = None
    uses_y: bool = True
    breakpoints: tuple[float, ...] = ()
    name: str = "state_dependent"

    def eta(self, t, x, y):
        return np.asarray(self.fn(np.asarray(t, dtype=float), np.asarray(x, dtype=float), np.asarray(y, dtype=float)))

    def eta_dx(self, t, x, y):
        if self.dx is None:
            return super().eta_dx(t, x, y)
        return np.asarray(self.dx(t, x, y))

    def eta_dxx(self, t, x, y):
        if self.dxx is None:
            return super().eta_dxx(t, x, y)
        return np.asarray(self.dxx(t, x, y))

    @property
    def derivative_source(self) -> str:
        return "analytic" if self.dx is not None else "finite_difference"

    def check_bounds(self, horizon: float = 30.0, x_range: float = 1.0, y_max: float = 0.1) -> bool:
        t, x, y = np.meshgrid(np.linspace(0, horizon, 61), np.linspace(-x_range, x_range, 41), np.linspace(0, y_max, 5))
        e = self.eta(t, x, y)
        ok = True
        if self.alpha1 is not None:
            ok &= bool(np.all(e >= self.alpha1 - 1e-15))
        if self.alpha2 is not None:
            ok &= bool(np.all(e <= self.alpha2 + 1e-15))
        return ok


def hull_white_volatility(sigma: float, k: float) -> TimeDependentVol:
    """``eta(t) = sigma exp(-k t)`` (the ``g(T) = exp(-kT), h = sigma`` reduction)."""
    return TimeDependentVol(lambda t: sigma * np.exp(-k * t))


def textbook_hull_white_volatility(sigma: float) -> TimeDependentVol:
    """``eta(t) = sigma``, i.e. ``sigma(t, T) = sigma exp(-k (T - t))``."""
    return TimeDependentVol(lambda t: np.full_like(t, sigma, dtype=float))


def tanh_volatility(sigma: float, k: float, c: float, horizon: float = 100.0) -> StateDependentVol:
    """Test volatility ``sigma exp(-k t) (1 + c tanh(x))`` with analytic partials.

    Bounded, Lipschitz (constant ``sigma |c|``) and smooth for ``|c| < 1``;
    ``alpha1`` is the lower bound over ``[0, horizon]``.
    """
    if not abs(c) < 1:
        raise DomainError("need |c| < 1 for a positive volatility")

    def fn(t, x, y):
        return sigma * np.exp(-k * t) * (1.0 + c * np.tanh(x)) + 0.0 * y

    def dx(t, x, y):
        return sigma * np.exp(-k * t) * c / np.cosh(x) ** 2 + 0.0 * y

    def dxx(t, x, y):
        return -2.0 * sigma * np.exp(-k * t) * c * np.tanh(x) / np.cosh(x) ** 2 + 0.0 * y

    return StateDependentVol(
        fn,
        dx,
        dxx,
        alpha1=sigma * (1 - abs(c)) * np.exp(-k * horizon),
        alpha2=sigma * (1 + abs(c)),
        lipschitz=sigma * abs(c),
        uses_y=False,
        name=f"tanh(sigma={sigma}, k={k}, c={c})",
    )


@dataclass(frozen=True)
class CheyetteSpec:
    k: MeanReversion
    vol: Volatility
    curve: CurveSet
    label: str = ""

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(sorted(set(self.k.breakpoints) | set(self.vol.breakpoints)))

    def with_vol(self, vol: Volatility) -> "CheyetteSpec":
        return CheyetteSpec(self.k, vol, self.curve, self.label)

    def eta_bar(self, t, x):
        """``eta(t, x, ybar(t))``; ``ybar`` is only computed when ``eta`` uses it."""
        y = y_bar(self, t) if self.vol.uses_y else 0.0
        return self.vol.eta(t, x, y)


@dataclass(frozen=True)
class HullWhiteSpec:
    """Constant-parameter Hull-White in the ``eta(t) = sigma exp(-k t)`` reduction."""

    sigma: float
    k: float

    def to_cheyette(self, curve: CurveSet) -> CheyetteSpec:
        return CheyetteSpec(
            MeanReversion.constant(self.k),
            hull_white_volatility(self.sigma, self.k),
            curve,
            label=f"hull_white(sigma={self.sigma}, k={self.k})",
        )

    # closed-form kernels, used as cross-checks of the generic code
    def eta(self, s):
        return self.sigma * np.exp(-self.k * np.asarray(s, dtype=float))

    def beta(self, s, u):
        return np.broadcast_to(self.sigma * np.exp(-self.k * np.asarray(u, dtype=float)), np.broadcast_shapes(np.shape(s), np.shape(u)))

    def nu(self, s, t2):
        s = np.asarray(s, dtype=float)
        return self.sigma * (np.exp(-self.k * s) - np.exp(-self.k * t2)) / self.k

    def y_bar(self, t):
        t = np.asarray(t, dtype=float)
        return self.sigma**2 * t * np.exp(-2 * self.k * t)


@dataclass(frozen=True)
class ModelState:
    t: float
    x: float | np.ndarray = 0.0
    y: float | np.ndarray = 0.0

    def __post_init__(self):
        if np.any(np.asarray(self.y) < 0):
            raise DomainError("y must be non-negative")


def G(spec: CheyetteSpec, t, T):
    t = np.asarray(t, dtype=float)
    T = np.asarray(T, dtype=float)
    if np.any(T < t):
        raise DomainError("G(t, T) needs t <= T")
    return spec.k.G(t, T)


def bond_reconstruct(spec: CheyetteSpec, t: float, T, state: ModelState):
    """OIS bond ``P(t, T, x, y)`` from the model state at ``t``."""
    if state.t != t:
        raise DomainError(f"state is at t={state.t}, bond requested at t={t}")
    g = G(spec, t, T)
    log_ratio = spec.curve.ois.log_df(T) - spec.curve.ois.log_df(t)
    return np.exp(log_ratio - g * state.x - 0.5 * g * g * state.y)


def y_bar(spec: CheyetteSpec, t):
    """``int_0^t exp(-2 int_u^t k) eta(u, 0, 0)^2 du``."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be non-negative")
    tt = t[..., None]

    def integrand(u):
        return spec.k.decay(u, tt) ** 2 * spec.vol.eta(u, 0.0, 0.0) ** 2

    return gauss_legendre(integrand, 0.0, t, spec.breakpoints)


def x_bar_drift(spec: CheyetteSpec, t):
    """Deterministic part ``int_0^t exp(-int_u^t k) ybar(u) du`` of the approximated state."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be non-negative")
    tt = t[..., None]

    def integrand(u):
        return spec.k.decay(u, tt) * y_bar(spec, u)

    return gauss_legendre(integrand, 0.0, t, spec.breakpoints)


def integrated_x_drift(spec: CheyetteSpec, t0, t1):
    """``int_{t0}^{t1} x_bar_drift(u) du``, by swapping the order of integration."""
    t0, t1 = np.broadcast_arrays(np.asarray(t0, dtype=float), np.asarray(t1, dtype=float))
    a = t0[..., None]
    b = t1[..., None]

    def integrand(v):
        m = np.maximum(v, a)
        return y_bar(spec, v) * spec.k.decay(v, m) * spec.k.G(m, b)

    pts = set(spec.breakpoints) | set(np.unique(t0).tolist())
    return gauss_legendre(integrand, 0.0, t1, sorted(pts))


def expected_integrated_short_rate(spec: CheyetteSpec, t0, t1):
    """``E^Q[int_{t0}^{t1} r(u) du]`` with ``r = f(0, u) + x_u``."""
    t0 = np.asarray(t0, dtype=float)
    t1 = np.asarray(t1, dtype=float)
    if np.any(t0 < 0) or np.any(t1 <= t0):
        raise DomainError("need 0 <= t0 < t1")
    det = -(spec.curve.ois.log_df(t1) - spec.curve.ois.log_df(t0))
    return det + integrated_x_drift(spec, t0, t1)
