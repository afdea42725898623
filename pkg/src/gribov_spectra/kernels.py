"""Weights, the Theta function and the inverse-operator kernels.

All kernels are assembled from logarithms of their factors and exponentiated
once.  With ``delta ~ rho'**2`` the individual factors overflow long before
the kernels do, so the ``log_*`` functions are the primary implementations.

Notation: ``rho' = lambda/lambda'``, ``rho = mu/lambda`` and
``delta = rho' (rho + rho') - 1``.  On ``[0, rho')``::

    Theta(U) = int_0^U exp(-rho' s) (1 - s/rho')**-(delta+1) ds
    r(y)     = exp(2 rho' y) (1 - y/rho')**(2 delta)
    N(y, y1) = sqrt(r(y1)) Theta(min(y, y1)) / (lambda y1)
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .logquad import gauss_legendre, log_cumulative, log_quad
from .params import FrameTag, GribovParams, KernelFrame

SMALL_UPSILON = 1e-8  # relative to rho'; below it Theta uses its series
THETA_TOL = 1e-14


def _arr(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


def _check_square(p: GribovParams, *args: np.ndarray) -> None:
    rp = p.rho_prime
    for a in args:
        if np.any(a < 0) or np.any(a > rp) or np.any(np.isnan(a)):
            raise DomainError(f"argument outside [0, rho'={rp}]")


def _xlog1p(c: float, x: np.ndarray) -> np.ndarray:
    # c * log1p(x) with the convention 0 * log(0) = 0
    if c == 0:
        return np.zeros_like(x)
    with np.errstate(divide="ignore"):
        return c * np.log1p(x)


# --------------------------------------------------------------------------
# weights


def log_weight_r(y, p: GribovParams) -> np.ndarray:
    p.require_native()
    y = _arr(y)
    _check_square(p, y)
    rp = p.rho_prime
    return 2 * rp * y + _xlog1p(2 * p.delta, -y / rp)


def weight_r(y, p: GribovParams) -> np.ndarray:
    return np.exp(log_weight_r(y, p))


def log_weight_r_inf(y, rho: float) -> np.ndarray:
    y = _arr(y)
    if np.any(y < 0):
        raise DomainError("r_inf is defined for y >= 0")
    return -y * y - 2 * rho * y


def weight_r_inf(y, rho: float) -> np.ndarray:
    return np.exp(log_weight_r_inf(y, rho))


# --------------------------------------------------------------------------
# Theta


def log_theta(upsilon, p: GribovParams, tol: float = THETA_TOL) -> np.ndarray:
    """log Theta(U) for ``0 <= U < rho'``.

    Integrated in ``t = -log(1 - s/rho')`` where the integrand becomes
    ``rho' * exp(-rho' s(t) + delta t)``; that removes the endpoint
    singularity at ``s = rho'`` and leaves a smooth, at most exponentially
    growing log-integrand.  Below ``U = 1e-8 rho'`` the series
    ``U (1 + rho U / 2)`` is used.
    """
    p.require_native()
    U = _arr(upsilon)
    rp, d = p.rho_prime, p.delta
    if np.any(U < 0) or np.any(U >= rp) or np.any(np.isnan(U)):
        raise DomainError(f"Theta needs 0 <= upsilon < rho'={rp}")

    out = np.empty(U.shape)
    small = U < SMALL_UPSILON * rp
    with np.errstate(divide="ignore"):
        out[small] = np.log(U[small]) + np.log1p(p.rho * U[small] / 2)
    big = ~small
    if np.any(big):
        t = -np.log1p(-U[big] / rp)
        log_rp = np.log(rp)

        def logf(tt):
            s = -rp * np.expm1(-tt)
            return log_rp - rp * s + d * tt

        out[big] = log_cumulative(logf, 0.0, t, tol=tol)
    return out


def theta(upsilon, p: GribovParams, tol: float = THETA_TOL) -> np.ndarray:
    return np.exp(log_theta(upsilon, p, tol))


def log_theta_limit(y, rho: float, tol: float = THETA_TOL) -> np.ndarray:
    """log of ``int_0^y exp(u**2/2 + rho u) du``, the limit-kernel inner integral."""
    y = _arr(y)
    if np.any(y < 0) or np.any(np.isnan(y)):
        raise DomainError("limit inner integral needs y >= 0")
    out = np.empty(y.shape)
    small = y < SMALL_UPSILON
    with np.errstate(divide="ignore"):
        out[small] = np.log(y[small]) + np.log1p(rho * y[small] / 2)
    big = ~small
    if np.any(big):
        out[big] = log_cumulative(lambda u: 0.5 * u * u + rho * u, 0.0, y[big], tol=tol)
    return out


def _log_theta_ratio(log_th_min: np.ndarray, y: np.ndarray, y1: np.ndarray) -> np.ndarray:
    """log(Theta(min(y, y1)) / y1) with the y1 -> 0 limit filled in.

    At ``y1 = 0 < y`` the ratio tends to 1; the row ``y = 0`` is zero.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        out = log_th_min - np.log(y1)
    out = np.where((y1 == 0) & (y > 0), 0.0, out)
    return np.where(y == 0, -np.inf, out)


def _log_theta_min(p: GribovParams, y: np.ndarray, y1: np.ndarray) -> np.ndarray:
    m = np.minimum(y, y1)
    rp = p.rho_prime
    out = np.full(m.shape, np.inf)
    inside = m < rp
    out[inside] = log_theta(m[inside], p)
    return out


# --------------------------------------------------------------------------
# kernels on [0, rho']^2


def _prepare(y, y1, p: GribovParams):
    p.require_native()
    y, y1 = np.broadcast_arrays(_arr(y), _arr(y1))
    _check_square(p, y, y1)
    if np.any((y == p.rho_prime) & (y1 == p.rho_prime)):
        raise DomainError("kernel is not evaluated at the corner (rho', rho')")
    return y, y1


def _finish(logv: np.ndarray) -> np.ndarray:
    v = np.exp(logv)
    return v if v.ndim else float(v)


def log_kernel_N(y, y1, p: GribovParams) -> np.ndarray:
    """log N(y, y1) in the normalised form (1/(lambda y1)) e^{rho' y1} (1 - y1/rho')^delta Theta."""
    y, y1 = _prepare(y, y1, p)
    rp, d = p.rho_prime, p.delta
    lth = _log_theta_min(p, y, y1)
    pref = -np.log(p.lam) + rp * y1 + _xlog1p(d, -y1 / rp)
    with np.errstate(invalid="ignore"):
        out = pref + _log_theta_ratio(lth, y, y1)
    # y1 = rho' with y < rho': the (1 - y1/rho')**delta factor wins
    return np.where(np.isnan(out), -np.inf, out)


def kernel_N(y, y1, p: GribovParams) -> np.ndarray:
    return _finish(log_kernel_N(y, y1, p))


def log_kernel_N_unscaled(y, y1, p: GribovParams, tol: float = THETA_TOL) -> np.ndarray:
    """log N(y, y1) in the form (1/(lambda' y1)) e^{rho' y1} (rho' - y1)^delta I(min).

    ``I(m) = int_0^m e^{-rho' s} (rho' - s)^-(delta+1) ds`` is integrated
    directly in ``s`` and shares no code path with :func:`log_theta`, so this
    serves as an independent check of :func:`log_kernel_N`.
    """
    y, y1 = _prepare(y, y1, p)
    rp, d = p.rho_prime, p.delta
    m = np.minimum(y, y1)

    def logf(s):
        return -rp * s - (d + 1) * np.log(rp - s)

    li = np.full(m.shape, np.inf)
    inside = m < rp
    li[inside] = log_quad(logf, 0.0, m[inside], tol=tol)
    with np.errstate(divide="ignore"):
        lp = -np.log(p.lambda_prime) + rp * y1 + (d * np.log(rp - y1) if d else 0.0)
    with np.errstate(invalid="ignore"):
        out = lp + _log_theta_ratio(li, y, y1)
    return np.where(np.isnan(out), -np.inf, out)


def kernel_N_unscaled(y, y1, p: GribovParams) -> np.ndarray:
    return _finish(log_kernel_N_unscaled(y, y1, p))


def log_kernel_N_tilde(y, y1, p: GribovParams) -> np.ndarray:
    """log of Theta(min(y, y1)) / (lambda y1 sqrt(r(y1)))."""
    y, y1 = _prepare(y, y1, p)
    lth = _log_theta_min(p, y, y1)
    with np.errstate(invalid="ignore"):
        out = -np.log(p.lam) - 0.5 * log_weight_r(y1, p) + _log_theta_ratio(lth, y, y1)
    return np.where(np.isnan(out), -np.inf, out)


def kernel_N_tilde(y, y1, p: GribovParams) -> np.ndarray:
    return _finish(log_kernel_N_tilde(y, y1, p))


# --------------------------------------------------------------------------
# limit kernel (lambda' = 0) on [0, inf)^2


def log_kernel_limit(y, s, mu: float, lam: float) -> np.ndarray:
    y, s = np.broadcast_arrays(_arr(y), _arr(s))
    if np.any(y < 0) or np.any(s < 0):
        raise DomainError("limit kernel needs y, s >= 0")
    rho = mu / lam
    lth = log_theta_limit(np.minimum(y, s), rho)
    return -np.log(lam) - 0.5 * s * s - rho * s + _log_theta_ratio(lth, y, s)


def kernel_limit(y, s, mu: float, lam: float) -> np.ndarray:
    return _finish(log_kernel_limit(y, s, mu, lam))


# --------------------------------------------------------------------------
# symmetrised kernel T


def log_kernel_T(y, y1, p: GribovParams, frame: KernelFrame | str) -> np.ndarray:
    """log T(y, y1), the kernel of the operator moved to unweighted L2.

    Native frame: ``sqrt(r(y)) Theta(min) / (lambda y1)``.  Limit frame:
    ``N(y, y1) sqrt(r_inf(y) / r_inf(y1))`` where ``N`` is the finite-rho'
    kernel cut off outside ``[0, rho']**2`` or the limit kernel when
    ``lambda' = 0``.  Both are diagonal similarity transforms of ``N`` and
    therefore share its spectrum.
    """
    frame = KernelFrame.parse(frame)
    frame.check(p)
    if frame.tag is FrameTag.PLAIN:
        if p.is_limit:
            return log_kernel_limit(y, y1, p.mu, p.lam)
        return log_kernel_N(y, y1, p)
    if frame.tag is FrameTag.NATIVE:
        y, y1 = _prepare(y, y1, p)
        lth = _log_theta_min(p, y, y1)
        with np.errstate(invalid="ignore"):
            out = 0.5 * log_weight_r(y, p) - np.log(p.lam) + _log_theta_ratio(lth, y, y1)
        return np.where(np.isnan(out), -np.inf, out)

    y, y1 = np.broadcast_arrays(_arr(y), _arr(y1))
    if np.any(y < 0) or np.any(y1 < 0):
        raise DomainError("limit frame needs y, y1 >= 0")
    shift = 0.5 * (log_weight_r_inf(y, p.rho) - log_weight_r_inf(y1, p.rho))
    if p.is_limit:
        return log_kernel_limit(y, y1, p.mu, p.lam) + shift
    rp = p.rho_prime
    out = np.full(y.shape, -np.inf)
    inside = (y <= rp) & (y1 <= rp) & ~((y == rp) & (y1 == rp))
    out[inside] = log_kernel_N(y[inside], y1[inside], p) + shift[inside]
    return out


def kernel_T(y, y1, p: GribovParams, frame: KernelFrame | str) -> np.ndarray:
    return _finish(log_kernel_T(y, y1, p, frame))


# --------------------------------------------------------------------------
# complex intercept (analyticity probe)


def kernel_N_complex_mu(
    y: float, y1: float, rho_prime: float, mu: complex, lam: float, order: int = 64
) -> complex:
    """Plain kernel N(y, y1) continued to complex ``mu``.

    Written as ``(1/(lambda y1)) int_0^min rho'/(rho'-s) e^{rho'(y1-s)}
    [(rho'-y1)/(rho'-s)]**delta ds``; the bracket lies in (0, 1] so the power
    extends to complex ``delta`` as ``exp(delta * log(bracket))``.
    """
    if not (0 <= y <= rho_prime and 0 < y1 < rho_prime):
        raise DomainError("complex kernel needs 0 <= y <= rho', 0 < y1 < rho'")
    m = min(y, y1)
    if m == 0:
        return 0j
    delta = rho_prime * (mu / lam + rho_prime) - 1
    x, w = gauss_legendre(order)
    s = 0.5 * m * (x + 1)
    logb = np.log(rho_prime - y1) - np.log(rho_prime - s)
    f = rho_prime / (rho_prime - s) * np.exp(rho_prime * (y1 - s) + delta * logb)
    return complex(0.5 * m * np.dot(w, f) / (lam * y1))
