"""Numerical integration used throughout the package.

Two integrators live here:

* :func:`adaptive_simpson` - vectorised, breadth-first adaptive Simpson rule
  with Richardson correction.  Used for the outer (product level) integrals,
  where an error estimate is reported back to the caller.
* :func:`gauss_legendre` - composite Gauss-Legendre rule over a fixed set of
  breakpoints, vectorised over the integration limits.  Used for the inner
  kernel integrals, which are smooth between breakpoints and are evaluated
  on whole arrays of limits at once.

Both expect integrands that accept and return numpy arrays.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

logger = logging.getLogger(__name__)

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class QuadResult:
    value: float
    error: float
    evaluations: int


def adaptive_simpson(
    f: ArrayFn,
    a: float,
    b: float,
    tol: float = 1e-12,
    max_depth: int = 40,
    points: Iterable[float] = (),
    min_depth: int = 3,
) -> QuadResult:
    """Integrate ``f`` over ``[a, b]`` with adaptive Simpson.

    The interval is first split at any ``points`` lying strictly inside it
    (kinks of the integrand).  Each sub-interval is refined until the local
    Simpson estimate changes by less than ``15 * tol_local``, where the
    absolute tolerance is shared in proportion to the interval length.
    All intervals at a given depth are evaluated in one call to ``f``.

    Returns the Richardson-corrected sum and the summed local error
    estimates.  Intervals still unresolved at ``max_depth`` are accepted and
    their error is included in the estimate.
    """
    a = float(a)
    b = float(b)
    if b == a:
        return QuadResult(0.0, 0.0, 0)
    if b < a:
        res = adaptive_simpson(f, b, a, tol, max_depth, points, min_depth)
        return QuadResult(-res.value, res.error, res.evaluations)

    edges = np.unique(np.array([a, b] + [p for p in points if a < p < b], dtype=float))
    lo = edges[:-1]
    hi = edges[1:]
    mid = 0.5 * (lo + hi)
    vals = _eval(f, np.concatenate([lo, mid, hi]))
    n = lo.size
    f_lo, f_mid, f_hi = vals[:n], vals[n : 2 * n], vals[2 * n :]
    whole = (hi - lo) / 6.0 * (f_lo + 4.0 * f_mid + f_hi)
    local_tol = tol * (hi - lo) / (b - a)
    n_eval = 3 * n

    total = 0.0
    error = 0.0
    for depth in range(max_depth + 1):
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        vals = _eval(f, np.concatenate([lm, rm]))
        n_eval += vals.size
        f_lm, f_rm = vals[: lo.size], vals[lo.size :]
        h = hi - lo
        left = h / 12.0 * (f_lo + 4.0 * f_lm + f_mid)
        right = h / 12.0 * (f_mid + 4.0 * f_rm + f_hi)
        delta = left + right - whole

        if depth < min_depth:
            done = np.zeros(lo.size, dtype=bool)
        elif depth == max_depth:
            done = np.ones(lo.size, dtype=bool)
            if np.any(np.abs(delta) > 15.0 * local_tol):
                logger.warning("adaptive_simpson reached max depth %d on [%g, %g]", max_depth, a, b)
        else:
            done = np.abs(delta) <= 15.0 * local_tol

        if np.any(done):
            total += float(np.sum(left[done] + right[done] + delta[done] / 15.0))
            error += float(np.sum(np.abs(delta[done]))) / 15.0
        keep = ~done
        if not np.any(keep):
            break
        lo, mid, hi = lo[keep], mid[keep], hi[keep]
        f_lo, f_lm, f_mid, f_rm, f_hi = f_lo[keep], f_lm[keep], f_mid[keep], f_rm[keep], f_hi[keep]
        left, right = left[keep], right[keep]
        local_tol = local_tol[keep] / 2.0
        # children: [lo, mid] and [mid, hi]
        lo, mid, hi = (
            np.concatenate([lo, mid]),
            np.concatenate([lm[keep], rm[keep]]),
            np.concatenate([mid, hi]),
        )
        f_lo, f_mid, f_hi = (
            np.concatenate([f_lo, f_mid]),
            np.concatenate([f_lm, f_rm]),
            np.concatenate([f_mid, f_hi]),
        )
        whole = np.concatenate([left, right])
        local_tol = np.concatenate([local_tol, local_tol])

    return QuadResult(total, error, n_eval)


def _eval(f: ArrayFn, x: np.ndarray) -> np.ndarray:
    y = np.asarray(f(x), dtype=float)
    if y.shape != x.shape:
        y = np.broadcast_to(y, x.shape).copy()
    if not np.all(np.isfinite(y)):
        raise FloatingPointError("integrand returned non-finite values")
    return y


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gl_nodes(n: int) -> tuple[np.ndarray, np.ndarray]:
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def gauss_legendre(
    f: ArrayFn,
    a,
    b,
    breakpoints: Iterable[float] = (),
    n: int = 40,
) -> np.ndarray:
    """Composite Gauss-Legendre integral of ``f`` from ``a`` to ``b``.

    ``a`` and ``b`` broadcast against each other; the result has their
    broadcast shape.  The rule is applied separately on every piece of
    ``[a, b]`` cut by ``breakpoints``, so integrands that are smooth between
    breakpoints are integrated to near machine precision.  ``f`` receives
    node arrays of shape ``result.shape + (n,)``.

    Reversed limits (``b < a``) give the negated integral.
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    sign = np.where(b < a, -1.0, 1.0)
    lo_all = np.minimum(a, b)
    hi_all = np.maximum(a, b)
    x, w = _gl_nodes(n)
    edges = np.concatenate([[-np.inf], np.unique(np.asarray(list(breakpoints), dtype=float)), [np.inf]])
    total = np.zeros(lo_all.shape)
    for left, right in zip(edges[:-1], edges[1:]):
        lo = np.clip(lo_all, left, right)
        hi = np.clip(hi_all, left, right)
        half = 0.5 * (hi - lo)
        if not np.any(half > 0):
            continue
        nodes = (0.5 * (hi + lo))[..., None] + half[..., None] * x
        vals = np.asarray(f(nodes), dtype=float)
        total = total + half * np.sum(vals * w, axis=-1)
    return sign * total

