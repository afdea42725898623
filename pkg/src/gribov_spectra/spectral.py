"""Perron eigenpair, subdominant gap, Hilbert-Schmidt norms and the ODE check."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import kernels as K
from .discretize import (
    DEFAULT_EPS,
    DEFAULT_N,
    OperatorMatrix,
    QuadratureRule,
    _KernelData,
    apply_plain,
    assemble,
    frame_rule,
)
from .errors import ConvergenceError, DomainError, NumericalError, ParameterError
from .logquad import gauss_legendre, log_quad, logsumexp
from .params import FrameTag, GribovParams, KernelFrame

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 100_000


@dataclass(frozen=True)
class SpectralResult:
    omega: float
    sigma: float
    eigenvector: np.ndarray
    residual: float
    iterations: int
    gap: float
    nodes: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def summary(self) -> str:
        lines = []
        p = self.meta.get("params")
        if p is not None:
            lines.append(f"params     lambda'={p['lambda_prime']!r} mu={p['mu']!r} lambda={p['lambda']!r}")
        for key in ("frame", "n", "scheme"):
            if key in self.meta:
                lines.append(f"{key:<10} {self.meta[key]}")
        if "fallback" in self.meta:
            lines.append(f"note       {self.meta['fallback']}")
        lines += [
            f"Omega      {self.omega:.17g}",
            f"sigma      {self.sigma:.17g}",
            f"gap        {self.gap:.17g}",
            f"residual   {self.residual:.3e}",
            f"iterations {self.iterations}",
        ]
        return "\n".join(lines)


def start_vector(M: OperatorMatrix | np.ndarray) -> np.ndarray:
    """sin(y)**2 / y at the nodes, carried into the matrix frame.

    This is the test function ``sin(iz)**2 / (iz)`` restricted to ``z = -iy``.
    Bare arrays get the all-ones vector.
    """
    if isinstance(M, OperatorMatrix):
        y = M.rule.nodes
        v = M.to_frame_vector(np.sin(y) ** 2 / y)
    else:
        v = np.ones(np.asarray(M).shape[0])
    return v / np.linalg.norm(v)


def _entries(M) -> np.ndarray:
    return M.entries if isinstance(M, OperatorMatrix) else np.asarray(M, dtype=float)


def _iterate(A: np.ndarray, v: np.ndarray, tol: float, max_iter: int):
    v = v / np.linalg.norm(v)
    omega = 0.0
    for it in range(1, max_iter + 1):
        w = A @ v
        new = float(v @ w)
        res = float(np.linalg.norm(w - new * v))
        nw = np.linalg.norm(w)
        if nw == 0 or not np.isfinite(nw):
            raise NumericalError("power iteration hit a zero or non-finite vector")
        if abs(new - omega) <= tol * abs(new) and res <= tol * max(1.0, abs(new)):
            return new, v, res, it
        omega = new
        v = w / nw
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def power_iteration(
    M: OperatorMatrix | np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    *,
    with_gap: bool = True,
) -> SpectralResult:
    """Dominant eigenpair by power iteration with a Rayleigh-quotient estimate.

    Stops when the Rayleigh quotient changes by less than ``tol`` (relative)
    and ``||A v - Omega v|| <= tol * max(1, Omega)``.  The eigenvector is
    oriented so its first entry is positive; a negative entry after that is a
    positivity violation and raises :class:`NumericalError`.
    """
    if tol <= 0:
        raise ParameterError("tol must be > 0")
    A = _entries(M)
    omega, v, res, it = _iterate(A, start_vector(M), tol, max_iter)
    if omega <= 0:
        raise NumericalError(f"dominant Rayleigh quotient is not positive: {omega}")
    if v[0] < 0:
        v = -v
    if np.any(v < 0):
        k = int(np.argmin(v))
        raise NumericalError(f"eigenvector entry {k} is negative ({v[k]:.3e}); kernel not positive")
    meta = {}
    nodes = None
    if isinstance(M, OperatorMatrix):
        nodes = M.rule.nodes
        meta = {
            "params": M.params.as_dict(),
            "frame": M.frame.tag.value,
            "n": M.n,
            "scheme": M.metadata.get("scheme"),
        }
    result = SpectralResult(omega, 1.0 / omega, v, res, it, math.nan, nodes, meta)
    if with_gap:
        gap = subdominant_gap(M, result, tol=max(tol, 1e-10), max_iter=max_iter)
        result = SpectralResult(omega, 1.0 / omega, v, res, it, gap, nodes, meta)
    return result


def _plain_view(M, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Undo the frame scaling ``D A D^-1`` of an :class:`OperatorMatrix`."""
    if not isinstance(M, OperatorMatrix) or M.frame.tag is FrameTag.PLAIN:
        return _entries(M), np.asarray(v, dtype=float)
    ld = _KernelData(M.params, M.frame).log_scale(M.rule.nodes)
    A = M.entries
    with np.errstate(divide="ignore", over="ignore"):
        B = np.sign(A) * np.exp(np.log(np.abs(A)) + ld[None, :] - ld[:, None])
        lv = np.log(np.abs(v)) - ld
    u = np.sign(v) * np.exp(lv - np.max(lv))
    if not (np.all(np.isfinite(B)) and np.all(np.isfinite(u))):
        raise NumericalError("plain-frame view of the matrix is not finite")
    return B, u


def subdominant_gap(
    M: OperatorMatrix | np.ndarray,
    dominant: SpectralResult,
    tol: float = 1e-10,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """Estimate ``|lambda_2| / Omega`` by deflating the Perron pair.

    With ``P = I - v v^T`` the matrix ``P A P`` has spectrum ``{0}`` plus the
    non-dominant eigenvalues of ``A`` (Schur deflation), so power iteration on
    it finds ``|lambda_2|``.  The growth rate is measured over two steps,
    which is insensitive to the sign of ``lambda_2``.  Weighted-frame
    matrices are first carried back to the plain frame by the diagonal
    similarity that defines them; the spectrum is unchanged but the entries
    stay bounded, which the deflated iteration needs.
    """
    A, v = _plain_view(M, dominant.eigenvector)
    v = v / np.linalg.norm(v)
    scale = dominant.omega
    if not scale > 0:
        raise NumericalError("deflation needs a positive dominant eigenvalue")

    def step(x):
        x = x - v * (v @ x)
        y = A @ x
        return y - v * (v @ y)

    x = step(start_vector(M) + 1e-3)
    est = -1.0
    for _ in range(max_iter):
        nx = np.linalg.norm(x)
        if not np.isfinite(nx):
            raise NumericalError("deflated iteration overflowed")
        if nx <= 1e-14 * scale:
            return 0.0
        y = step(x / nx)
        ny = float(np.linalg.norm(y))
        if ny <= 1e-14 * scale:
            return 0.0
        z = step(y / ny)
        new = math.sqrt(ny * float(np.linalg.norm(z)))
        if abs(new - est) <= tol * new:
            return new / scale
        est = new
        x = z
    raise ConvergenceError("subdominant iteration did not converge")


# --------------------------------------------------------------------------
# Hilbert-Schmidt norm


def _log_omega(data: _KernelData, y):
    if data.frame.tag is FrameTag.NATIVE:
        return K.log_weight_r(y, data.p)
    if data.frame.tag is FrameTag.LIMIT:
        return K.log_weight_r_inf(y, data.p.rho)
    return np.zeros(np.shape(y))


def _log_upper_mass(data: _KernelData, y1: np.ndarray, b: float) -> np.ndarray:
    """``log int_{y1}^b w``; the native weight is integrated in ``rho' - y``
    because ``1 - y/rho'`` loses digits next to ``rho'``."""
    tag = data.frame.tag
    if tag is FrameTag.PLAIN:
        return np.log(b - y1)
    if tag is FrameTag.LIMIT:
        return log_quad(lambda y: _log_omega(data, y), y1, np.full_like(y1, b), tol=1e-13)
    rp, d = data.p.rho_prime, data.p.delta

    def log_r_dist(w):
        with np.errstate(divide="ignore"):
            return 2 * rp * (rp - w) + 2 * d * np.log(w / rp)

    return log_quad(log_r_dist, np.zeros_like(y1), b - y1, tol=1e-13)


def _log_gap_cumulative(logf, pts: np.ndarray, order: int = 24, split: int = 2) -> np.ndarray:
    """``log int_0^{pts[k]} exp(logf)`` for sorted ``pts`` by fixed Gauss on each gap.

    Each gap between consecutive points is cut into ``split`` pieces; ``logf``
    is called once on all abscissae, which keeps nested special functions cheap.
    """
    edges = np.concatenate([[0.0], pts])
    fine = np.linspace(0.0, 1.0, split + 1)
    lo = (edges[:-1, None] + np.diff(edges)[:, None] * fine[None, :-1]).ravel()
    hi = (edges[:-1, None] + np.diff(edges)[:, None] * fine[None, 1:]).ravel()
    x, w = gauss_legendre(order)
    half = 0.5 * (hi - lo)
    s = 0.5 * (hi + lo)[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(logf(s.ravel())).reshape(s.shape)
    pieces = logsumexp(vals, axis=1, b=w[None, :]) + np.log(half)
    acc = np.logaddexp.accumulate(pieces)
    return acc[split - 1 :: split]


def hs_norm(p: GribovParams, frame: KernelFrame | str, rule: QuadratureRule) -> float:
    """Hilbert-Schmidt norm of the operator in ``frame`` over ``rule``'s interval.

    With weight ``w`` of the frame and ``N = Theta(min) W``::

        ||K||_HS^2 = int [W^2/w](y1) int_0^y1 Theta^2 w dy dy1
                   + int [Theta^2 W^2/w](y1) int_y1^b w dy dy1

    i.e. the square is split at the diagonal so every inner integrand is
    smooth.  The outer integral uses ``rule``; the inner ones are adaptive and
    in log space.
    """
    frame = KernelFrame.parse(frame)
    frame.check(p)
    if frame.tag is FrameTag.NATIVE and p.delta < 0:
        raise ParameterError("native HS norm needs delta >= 0")
    data = _KernelData(p, frame)
    y1 = rule.nodes
    b = rule.upper

    with np.errstate(divide="ignore"):
        J = _log_gap_cumulative(lambda y: 2 * data.log_theta(y) + _log_omega(data, y), y1)
        R = _log_upper_mass(data, y1, b)
        lth = data.log_theta(y1)
        lW = data.log_W(y1)
        lw = _log_omega(data, y1)
        part1 = 2 * lW - lw + J
        part2 = 2 * (lth + lW) - lw + R
    both = np.logaddexp(part1, part2)
    total = logsumexp(both, b=rule.weights)
    if not np.isfinite(total):
        raise NumericalError("HS norm panel is not finite (delta < 0 or overflow?)")
    return math.exp(0.5 * total)


def hs_norm_matrix(A: np.ndarray, weights: np.ndarray) -> float:
    """HS norm of a kernel sampled as ``A[i, j] = T(y_i, y_j) w_j``."""
    T = A / weights[None, :]
    return float(math.sqrt(np.sum(weights[:, None] * T * T * weights[None, :])))


# --------------------------------------------------------------------------
# smallest Gribov eigenvalue


def smallest_eigenvalue(
    p: GribovParams,
    rule: QuadratureRule | None = None,
    *,
    frame: KernelFrame | str | None = None,
    n: int = DEFAULT_N,
    eps: float = DEFAULT_EPS,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    scheme: str = "product",
) -> SpectralResult:
    """sigma = 1 / Omega, the smallest nonzero eigenvalue of the Gribov operator.

    The frame defaults to native for ``lambda' > 0`` and limit otherwise.
    When the default native assembly overflows (large delta) the limit frame,
    whose spectrum is the same, is used instead and ``meta["fallback"]``
    records why.  An explicitly requested frame never falls back.
    """
    fallback = None
    if frame is None and rule is None and not p.is_limit:
        try:
            M = assemble(p, "native", frame_rule(p, "native", n, eps), scheme=scheme)
        except NumericalError as exc:
            fallback = f"native assembly failed ({exc}); limit frame used"
            frame = KernelFrame.parse("limit")
            M = assemble(p, frame, frame_rule(p, frame, n, eps), scheme=scheme)
    else:
        if frame is None:
            frame = "limit" if p.is_limit else "native"
        frame = KernelFrame.parse(frame)
        if rule is None:
            rule = frame_rule(p, frame, n, eps)
        M = assemble(p, frame, rule, scheme=scheme)
    res = power_iteration(M, tol, max_iter)
    res.meta["eps"] = eps if M.frame.tag is FrameTag.LIMIT else None
    res.meta["tail_closure"] = M.metadata["tail_closure"]
    if fallback:
        res.meta["fallback"] = fallback
    return res


# --------------------------------------------------------------------------
# differential-operator residual


def fd_step(p: GribovParams, quad_tol: float = 1e-4) -> float:
    """Finite-difference step ``sqrt(quad_tol) * rho' / 10``."""
    return math.sqrt(quad_tol) * p.rho_prime / 10.0


def ode_residual(
    p: GribovParams,
    f: Callable[[np.ndarray], np.ndarray],
    sample_points: Sequence[float],
    n: int = DEFAULT_N,
    h: float | None = None,
) -> float:
    """Max relative residual of ``(l' y^2 - l y) u'' + (l y^2 + mu y) u' = f``.

    ``u = K f`` comes from :func:`apply_plain`; ``u'`` and ``u''`` are
    central differences with step ``h`` (default :func:`fd_step`).
    """
    p.require_native()
    rp = p.rho_prime
    y = np.asarray(sample_points, dtype=float)
    margin = 0.05 * rp
    if np.any(y < margin) or np.any(y > rp - margin):
        raise DomainError(f"sample points must keep a margin of {margin} from 0 and rho'")
    if h is None:
        h = fd_step(p)
    pts = np.concatenate([y - h, y, y + h])
    u = apply_plain(p, f, pts, n=n)
    um, u0, up = np.split(u, 3)
    d1 = (up - um) / (2 * h)
    d2 = (up - 2 * u0 + um) / (h * h)
    fy = np.asarray(f(y), dtype=float)
    lhs = (p.lambda_prime * y * y - p.lam * y) * d2 + (p.lam * y * y + p.mu * y) * d1
    return float(np.max(np.abs(lhs - fy) / np.maximum(1.0, np.abs(fy))))
