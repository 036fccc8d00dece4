"""Seeded Monte Carlo oracle for the Cheyette model under the bank-account measure.

Schemes
-------
* Time-dependent ``eta``: the pair ``(x_t, int_0^t x_u du)`` is jointly
  Gaussian with deterministic ``y = ybar``, so it is advanced exactly from one
  record time to the next.  The step size is irrelevant for this scheme.
* State-dependent ``eta``: Euler-Maruyama on ``x``, explicit Euler on the
  pathwise ``y`` ODE and the trapezoid rule on ``int x``.  The deterministic
  part ``int f(0, u) du`` of the integrated short rate is added exactly.

Random numbers
--------------
Paths are generated in fixed-size chunks.  Chunk ``j`` draws from
``Philox(seed).jumped(j)`` and turns 53-bit uniforms into normals by the
inverse CDF, so path ``i`` does not depend on the worker count.  With
antithetics, paths ``2i`` and ``2i + 1`` share the draw with opposite signs
and standard errors are computed from the pair averages.

Only the state at the requested record times is kept.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .adjusters import Cms, FraInArrears, Future, OisFuture
from .curves import annuity, df_ois, swap_rates
from .errors import DomainError, NumericError
from .model import CheyetteSpec, y_bar
from .quadrature import gauss_legendre

logger = logging.getLogger(__name__)

CHUNK_PAIRS = 8192
THREADS_ENV = "CA_ENGINE_THREADS"


@dataclass(frozen=True)
class McConfig:
    paths: int = 200_000
    steps_per_year: int = 250
    seed: int = 42
    antithetic: bool = True

    def __post_init__(self):
        if self.paths < 2:
            raise DomainError("need at least 2 paths")
        if self.steps_per_year < 12:
            raise DomainError("need at least 12 steps per year")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")

    @property
    def draws(self) -> int:
        """Independent normal draws per time step (pairs when antithetic)."""
        return -(-self.paths // 2) if self.antithetic else self.paths

    @property
    def total_paths(self) -> int:
        return 2 * self.draws if self.antithetic else self.draws


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    paths: int

    def z_score(self, target: float) -> float:
        if self.std_error == 0.0:
            return 0.0 if self.mean == target else np.inf
        return (self.mean - target) / self.std_error

    def shifted(self, offset: float) -> "McEstimate":
        return McEstimate(self.mean + offset, self.std_error, self.paths)


@dataclass(frozen=True)
class PathEnsemble:
    """State at the record times; arrays have shape ``(len(times), paths)``.

    ``times[0]`` is 0 and ``integrated_r[j]`` is ``int_0^{times[j]} r``.
    """

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    integrated_r: np.ndarray
    antithetic: bool

    def index(self, t: float) -> int:
        hits = np.flatnonzero(np.isclose(self.times, t, rtol=0.0, atol=1e-12))
        if hits.size == 0:
            raise DomainError(f"time {t} is not a record time")
        return int(hits[0])

    def at(self, t: float):
        j = self.index(t)
        return self.x[j], self.y[j], self.integrated_r[j]


def estimate(values: np.ndarray, antithetic: bool) -> McEstimate:
    """Sample mean and standard error; antithetic pairs are averaged first."""
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise NumericError("Monte Carlo payoff produced non-finite values")
    v = values.reshape(-1, 2).mean(axis=1) if antithetic else values
    se = float(np.std(v, ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
    return McEstimate(float(np.mean(v)), se, values.size)


# --------------------------------------------------------------------------- random numbers


def _normals(bitgen: np.random.BitGenerator, n: int) -> np.ndarray:
    u = ((bitgen.random_raw(n) >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def _signed(z: np.ndarray, antithetic: bool) -> np.ndarray:
    return np.stack([z, -z], axis=1).ravel() if antithetic else z


def _workers() -> int:
    cap = os.environ.get(THREADS_ENV)
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            logger.warning("ignoring non-integer %s=%r", THREADS_ENV, cap)
    return n


# --------------------------------------------------------------------------- exact Gaussian scheme


@dataclass(frozen=True)
class _Transition:
    decay: float
    G: float
    mean_x: float
    mean_I: float
    det_I: float
    l11: float
    l21: float
    l22: float


def _transitions(spec: CheyetteSpec, times: np.ndarray) -> list[_Transition]:
    """Conditional moments of ``(x_b, int_a^b x)`` given ``x_a`` for consecutive record times."""
    out = []
    bp = spec.breakpoints
    eta2 = lambda u: spec.vol.eta(u, 0.0, 0.0) ** 2  # noqa: E731
    for a, b in zip(times[:-1], times[1:]):
        D = lambda u: spec.k.decay(u, b)  # noqa: E731
        Gb = lambda u: spec.k.G(u, np.full_like(u, b))  # noqa: E731
        mean_x = float(gauss_legendre(lambda u: D(u) * y_bar(spec, u), a, b, bp))
        mean_I = float(gauss_legendre(lambda u: Gb(u) * y_bar(spec, u), a, b, bp))
        vx = float(gauss_legendre(lambda u: D(u) ** 2 * eta2(u), a, b, bp))
        vi = float(gauss_legendre(lambda u: Gb(u) ** 2 * eta2(u), a, b, bp))
        c = float(gauss_legendre(lambda u: D(u) * Gb(u) * eta2(u), a, b, bp))
        l11 = np.sqrt(vx)
        l21 = c / l11 if l11 > 0 else 0.0
        l22 = np.sqrt(max(vi - l21 * l21, 0.0))
        det_I = float(spec.curve.ois.log_df(a) - spec.curve.ois.log_df(b))
        out.append(_Transition(float(spec.k.decay(a, b)), float(spec.k.G(a, b)), mean_x, mean_I, det_I, l11, l21, l22))
    return out


def _chunk_exact(trans, y_rec, pairs, cfg, bitgen):
    n = 2 * pairs if cfg.antithetic else pairs
    x = np.zeros(n)
    integ = np.zeros(n)
    xs, Is = [x], [integ]
    for tr in trans:
        z1 = _signed(_normals(bitgen, pairs), cfg.antithetic)
        z2 = _signed(_normals(bitgen, pairs), cfg.antithetic)
        integ = integ + tr.det_I + tr.G * x + tr.mean_I + tr.l21 * z1 + tr.l22 * z2
        x = tr.decay * x + tr.mean_x + tr.l11 * z1
        xs.append(x)
        Is.append(integ)
    xs = np.array(xs)
    ys = np.broadcast_to(y_rec[:, None], xs.shape)
    return xs, ys, np.array(Is)


# --------------------------------------------------------------------------- Euler scheme


def _euler_grid(times: np.ndarray, steps_per_year: int):
    """Step times covering every record time exactly; returns (grid, record indices)."""
    grid = [0.0]
    rec = [0]
    for a, b in zip(times[:-1], times[1:]):
        n = max(1, int(np.ceil((b - a) * steps_per_year - 1e-9)))
        grid.extend(np.linspace(a, b, n + 1)[1:].tolist())
        rec.append(len(grid) - 1)
    return np.array(grid), rec


def _chunk_euler(spec, grid, rec, pairs, cfg, bitgen, with_approx=False):
    n = 2 * pairs if cfg.antithetic else pairs
    x = np.zeros(n)
    y = np.zeros(n)
    integ = np.zeros(n)
    xb = np.zeros(n)
    yb = 0.0
    vol = spec.vol
    out_x, out_y, out_I, out_xb = [x], [y], [integ], [xb]
    rec_set = set(rec[1:])
    log_df = spec.curve.ois.log_df(grid)
    for i in range(1, grid.size):
        t = grid[i - 1]
        dt = grid[i] - t
        k = float(spec.k(t))
        z = _signed(_normals(bitgen, pairs), cfg.antithetic) * np.sqrt(dt)
        e = vol.eta(t, x, y)
        x_new = x + (-k * x + y) * dt + e * z
        y = y + (e * e - 2.0 * k * y) * dt
        integ = integ + (log_df[i - 1] - log_df[i]) + 0.5 * (x + x_new) * dt
        if with_approx:
            e0 = vol.eta(t, 0.0, 0.0)
            xb = xb + (-k * xb + yb) * dt + vol.eta(t, x, yb) * z
            yb = yb + (e0 * e0 - 2.0 * k * yb) * dt
        x = x_new
        if i in rec_set:
            if not np.all(np.isfinite(x)):
                raise NumericError(f"Euler scheme produced non-finite x at t={grid[i]}")
            out_x.append(x)
            out_y.append(y)
            out_I.append(integ)
            out_xb.append(np.broadcast_to(xb, x.shape).copy())
    return np.array(out_x), np.array(out_y), np.array(out_I), np.array(out_xb)


# --------------------------------------------------------------------------- driver


def _record_times(horizon: float, record_times) -> np.ndarray:
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    pts = {float(horizon)} | {float(t) for t in (record_times or ())}
    if any(t <= 0 or t > horizon for t in pts):
        raise DomainError("record times must lie in (0, horizon]")
    return np.array([0.0] + sorted(pts))


def _chunks(cfg: McConfig):
    total = cfg.draws
    return [(j, min(CHUNK_PAIRS, total - j * CHUNK_PAIRS)) for j in range(-(-total // CHUNK_PAIRS))]


def _run_chunks(fn, cfg: McConfig):
    jobs = _chunks(cfg)

    def work(job):
        j, pairs = job
        return fn(pairs, np.random.Philox(cfg.seed).jumped(j))

    workers = min(_workers(), len(jobs))
    if workers <= 1:
        return [work(job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(work, jobs))


def simulate(spec: CheyetteSpec, cfg: McConfig, horizon: float, record_times=()) -> PathEnsemble:
    """Simulate ``(x, y, int r)`` to ``horizon``, keeping the requested record times."""
    times = _record_times(horizon, record_times)
    if spec.vol.time_dependent:
        trans = _transitions(spec, times)
        y_rec = np.asarray(y_bar(spec, times), dtype=float)
        parts = _run_chunks(lambda pairs, bg: _chunk_exact(trans, y_rec, pairs, cfg, bg), cfg)
    else:
        grid, rec = _euler_grid(times, cfg.steps_per_year)
        parts = _run_chunks(lambda pairs, bg: _chunk_euler(spec, grid, rec, pairs, cfg, bg)[:3], cfg)
    x, y, integ = (np.concatenate([p[i] for p in parts], axis=1) for i in range(3))
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(integ))):
        raise NumericError("simulation produced non-finite states")
    return PathEnsemble(times, x, np.ascontiguousarray(y), integ, cfg.antithetic)


# --------------------------------------------------------------------------- product estimators


def _bond(spec: CheyetteSpec, t: float, T, x, y):
    g = spec.k.G(t, T)
    return df_ois(spec.curve, t, T) * np.exp(-g * x - 0.5 * g * g * y)


def _libor(spec: CheyetteSpec, t: float, t1: float, t2: float, x, y):
    """Estimation-curve forward ``L_E(t, t1, t2)`` from the state at ``t``."""
    h = spec.curve.H(t, t1) / spec.curve.H(t, t2)
    return (h * _bond(spec, t, t1, x, y) / _bond(spec, t, t2, x, y) - 1.0) / (t2 - t1)


def discount_bond_ratio(spec: CheyetteSpec, cfg: McConfig, maturities) -> list[McEstimate]:
    """``E^Q[exp(-int_0^T r)] / P(0, T)`` for each maturity; each should be 1."""
    maturities = sorted(float(T) for T in maturities)
    ens = simulate(spec, cfg, maturities[-1], maturities)
    out = []
    for T in maturities:
        _, _, integ = ens.at(T)
        out.append(estimate(np.exp(-integ) / df_ois(spec.curve, 0.0, T), ens.antithetic))
    return out


def mc_future_rate(spec: CheyetteSpec, cfg: McConfig, p: Future) -> McEstimate:
    """``E^Q[L_E(t0, t1, t2)]``."""
    if p.t0 == 0:
        return McEstimate(float(_libor(spec, 0.0, p.t1, p.t2, 0.0, 0.0)), 0.0, cfg.total_paths)
    ens = simulate(spec, cfg, p.t0)
    x, y, _ = ens.at(p.t0)
    return estimate(_libor(spec, p.t0, p.t1, p.t2, x, y), ens.antithetic)


def mc_forward_benchmark(spec: CheyetteSpec, cfg: McConfig, p: Future) -> McEstimate:
    """``E^Q[exp(-int_0^t0 r) P(t0, t2) L_E(t0, t1, t2)] / P(0, t2)``; equals the curve forward."""
    if p.t0 == 0:
        return mc_future_rate(spec, cfg, p)
    ens = simulate(spec, cfg, p.t0)
    x, y, integ = ens.at(p.t0)
    pay = np.exp(-integ) * _bond(spec, p.t0, p.t2, x, y) * _libor(spec, p.t0, p.t1, p.t2, x, y)
    return estimate(pay / df_ois(spec.curve, 0.0, p.t2), ens.antithetic)


def mc_ois_future(spec: CheyetteSpec, cfg: McConfig, p: OisFuture) -> McEstimate:
    """Compounded ``(exp(I) - 1) / delta`` or averaged ``I / delta`` with ``I = int_{t0}^{t1} r``."""
    ens = simulate(spec, cfg, p.t1, [p.t0] if p.t0 > 0 else [])
    i1 = ens.at(p.t1)[2]
    i0 = ens.at(p.t0)[2] if p.t0 > 0 else 0.0
    integ = i1 - i0
    values = np.expm1(integ) / p.delta if p.mode == "compounding" else integ / p.delta
    return estimate(values, ens.antithetic)


def mc_fra_arrears(spec: CheyetteSpec, cfg: McConfig, p: FraInArrears) -> McEstimate:
    """``E^Q[exp(-int_0^t1 r) L_E(t1, t1, t2)] / P(0, t1)``."""
    if p.t1 == 0:
        return McEstimate(float(_libor(spec, 0.0, 0.0, p.t2, 0.0, 0.0)), 0.0, cfg.total_paths)
    ens = simulate(spec, cfg, p.t1)
    x, y, integ = ens.at(p.t1)
    pay = np.exp(-integ) * _libor(spec, p.t1, p.t1, p.t2, x, y)
    return estimate(pay / df_ois(spec.curve, 0.0, p.t1), ens.antithetic)


def swap_rate_from_state(spec: CheyetteSpec, sched, x, y):
    """OIS swap rate ``S_ois(t_a, x, y)`` for arrays of states."""
    ta = sched.ta
    dates = np.asarray(sched.funding_dates[1:])
    bonds = _bond(spec, ta, dates[:, None], x[None, :], y[None, :])
    a = np.sum(sched.funding_accruals[:, None] * bonds, axis=0)
    return (1.0 - bonds[-1]) / a


def mc_cms(spec: CheyetteSpec, cfg: McConfig, p: Cms) -> McEstimate:
    """``E^Q[exp(-int_0^ta r) P(ta, tp) (S_ois(ta) + frozen spread)] / P(0, tp)``."""
    sched = p.schedule
    frozen = swap_rates(spec.curve, sched, 0.0).frozen_spread
    if sched.ta == 0:
        return McEstimate(swap_rates(spec.curve, sched, 0.0).S_ab, 0.0, cfg.total_paths)
    ens = simulate(spec, cfg, sched.ta)
    x, y, integ = ens.at(sched.ta)
    x = np.asarray(x)
    y = np.broadcast_to(y, x.shape)
    s = swap_rate_from_state(spec, sched, x, y) + frozen
    pay = np.exp(-integ) * _bond(spec, sched.ta, p.tp, x, y) * s
    return estimate(pay / df_ois(spec.curve, 0.0, p.tp), ens.antithetic)


def mc_rate(spec: CheyetteSpec, cfg: McConfig, p) -> McEstimate:
    """Dispatch to the product's Monte Carlo estimator (the rate the adjuster targets)."""
    if isinstance(p, Future):
        return mc_future_rate(spec, cfg, p)
    if isinstance(p, OisFuture):
        return mc_ois_future(spec, cfg, p)
    if isinstance(p, FraInArrears):
        return mc_fra_arrears(spec, cfg, p)
    if isinstance(p, Cms):
        return mc_cms(spec, cfg, p)
    raise DomainError(f"unsupported product {type(p).__name__}")


# --------------------------------------------------------------------------- approximation error


def state_approx_error(spec: CheyetteSpec, cfg: McConfig, t, record_times=()) -> McEstimate | list[McEstimate]:
    """``E[(x_t - xbar_t)^2]`` by Euler co-simulation on shared noise.

    ``xbar`` solves ``dxbar = (-k xbar + ybar) dt + eta(t, x, ybar) dW`` with
    ``ybar`` from the ``eta(t, 0, 0)`` ODE, so ``x - xbar`` is driven only by
    ``y - ybar``.  It is identically zero when ``eta`` depends on time only.

    With ``record_times`` the estimates at ``sorted(record_times + [t])`` are
    returned as a list.
    """
    times = _record_times(float(t), record_times)
    grid, rec = _euler_grid(times, cfg.steps_per_year)
    parts = _run_chunks(lambda pairs, bg: _chunk_euler(spec, grid, rec, pairs, cfg, bg, with_approx=True), cfg)
    x = np.concatenate([p[0] for p in parts], axis=1)
    xb = np.concatenate([p[3] for p in parts], axis=1)
    ests = [estimate((x[j] - xb[j]) ** 2, cfg.antithetic) for j in range(1, times.size)]
    return ests if record_times else ests[-1]


def annuity_ratio_check(spec: CheyetteSpec, cfg: McConfig, sched) -> McEstimate:
    """``E^Q[exp(-int_0^ta r) annuity(ta)] / annuity(0)``; equals 1."""
    ens = simulate(spec, cfg, sched.ta)
    x, y, integ = ens.at(sched.ta)
    dates = np.asarray(sched.funding_dates[1:])
    bonds = _bond(spec, sched.ta, dates[:, None], x[None, :], np.broadcast_to(y, x.shape)[None, :])
    a = np.sum(sched.funding_accruals[:, None] * bonds, axis=0)
    return estimate(np.exp(-integ) * a / annuity(spec.curve, sched, 0.0), ens.antithetic)

