"""Vectorised adaptive Gauss-Legendre quadrature carried out in log space.

Integrands are supplied as their logarithm so that factors like
``exp(rho'*y) * (1 - y/rho')**(2*delta)`` never have to be formed directly.
Every interval of a batch is refined independently by bisection until the
Gauss estimate on the interval and on its two halves agree to ``tol``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConvergenceError

LogIntegrand = Callable[[np.ndarray], np.ndarray]

_EPS = np.finfo(float).eps


@lru_cache(maxsize=64)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def logsumexp(a: np.ndarray, axis: int = -1, b: np.ndarray | None = None) -> np.ndarray:
    """log(sum(b * exp(a))) along ``axis`` with ``b >= 0``; empty mass gives -inf."""
    a = np.asarray(a, dtype=float)
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    s = np.exp(a - m)
    if b is not None:
        s = s * b
    with np.errstate(divide="ignore"):
        out = np.log(np.sum(s, axis=axis)) + np.squeeze(m, axis=axis)
    return out


def _gauss_log(logf: LogIntegrand, a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    x, w = gauss_legendre(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = logf(pts)
    with np.errstate(divide="ignore"):
        return logsumexp(vals, axis=1, b=w[None, :]) + np.log(half)


def log_quad(
    logf: LogIntegrand,
    a,
    b,
    tol: float = 1e-14,
    order: int = 16,
    max_level: int = 60,
) -> np.ndarray:
    """Return ``log(int_a^b exp(logf(x)) dx)`` for each pair ``(a, b)``.

    ``logf`` must accept a 2-D array of abscissae and be vectorised.  Empty
    intervals (``a == b``) give ``-inf``.  Raises :class:`ConvergenceError`
    when some interval still disagrees after ``max_level`` bisections.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    a, b = np.broadcast_arrays(a, b)
    shape = a.shape
    a = a.ravel().copy()
    b = b.ravel().copy()
    if np.any(b < a):
        raise ValueError("log_quad needs a <= b")

    out = np.full(a.size, -np.inf)
    live = np.flatnonzero(b > a)
    A, B = a[live], b[live]
    est = _gauss_log(logf, A, B, order)
    owner = live

    for _ in range(max_level):
        if owner.size == 0:
            return out.reshape(shape)
        M = 0.5 * (A + B)
        left = _gauss_log(logf, A, M, order)
        right = _gauss_log(logf, M, B, order)
        refined = np.logaddexp(left, right)
        both_zero = ~np.isfinite(refined) & ~np.isfinite(est)
        with np.errstate(invalid="ignore"):
            diff = np.abs(refined - est)
        slack = tol + 8 * _EPS * np.abs(np.where(np.isfinite(refined), refined, 0.0))
        # pieces far below their integral's running total cannot matter
        total = out.copy()
        np.logaddexp.at(total, owner, refined)
        with np.errstate(invalid="ignore"):
            negligible = refined - total[owner] < np.log(tol) - 7.0
        done = both_zero | (diff <= slack) | negligible | (M <= A) | (M >= B)
        if np.any(done):
            np.logaddexp.at(out, owner[done], refined[done])
        keep = ~done
        A = np.concatenate([A[keep], M[keep]])
        B = np.concatenate([M[keep], B[keep]])
        est = np.concatenate([left[keep], right[keep]])
        owner = np.concatenate([owner[keep], owner[keep]])

    raise ConvergenceError(
        f"log_quad: {owner.size} subintervals unresolved after {max_level} bisections"
    )


def log_cumulative(
    logf: LogIntegrand, start: float, points, tol: float = 1e-14, order: int = 16
) -> np.ndarray:
    """``log(int_start^x exp(logf))`` for every ``x`` in ``points`` (all >= start).

    The points are sorted and the integral is accumulated gap by gap, so the
    cost is one adaptive quadrature per distinct point.
    """
    pts = np.asarray(points, dtype=float)
    flat = pts.ravel()
    if flat.size == 0:
        return np.empty(pts.shape)
    if np.any(flat < start):
        raise ValueError("log_cumulative: point below start")
    uniq, inv = np.unique(flat, return_inverse=True)
    lo = np.concatenate([[start], uniq[:-1]])
    pieces = log_quad(logf, lo, uniq, tol=tol, order=order)
    acc = np.logaddexp.accumulate(pieces)
    return acc[inv].reshape(pts.shape)
