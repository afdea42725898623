"""Quadrature rules and Nystrom assembly of the inverse operator.

Every kernel handled here has the semi-separable shape
``N(y, y1) = Theta(min(y, y1)) * W(y1)`` so that

    (K f)(y) = int_0^y G f dt + Theta(y) int_y^b W f dt,   G = Theta * W.

The kink of ``min(y, y1)`` on the diagonal limits a plain Nystrom matrix
``T(y_i, y_j) w_j`` to second-order convergence.  The default ``"product"``
scheme therefore splits every row at its own node: contributions from other
panels use the plain rule, while inside the node's own panel both halves are
integrated by Gauss rules on ``[a, y_i]`` and ``[y_i, b]`` applied to the
Lagrange interpolant of the panel values.  The ``"nystrom"`` scheme keeps the
textbook entries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels as K
from .errors import DomainError, NumericalError, ParameterError
from .logquad import gauss_legendre, log_quad
from .params import FrameTag, GribovParams, KernelFrame

DEFAULT_N = 200
DEFAULT_EPS = 1e-12
PANEL_ORDER = 20
GRADED_PANELS = 6


@dataclass(frozen=True)
class QuadratureRule:
    """Composite Gauss-Legendre rule; a single panel is the classical rule."""

    lower: float
    upper: float
    nodes: np.ndarray
    weights: np.ndarray
    breaks: np.ndarray  # panel edges, breaks[0] == lower, breaks[-1] == upper
    sizes: tuple[int, ...]  # nodes per panel

    def __post_init__(self) -> None:
        for a in (self.nodes, self.weights, self.breaks):
            a.setflags(write=False)

    @property
    def n(self) -> int:
        return self.nodes.size

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def panels(self):
        """Yield ``(slice, a, b)`` for each panel."""
        off = 0
        for k, s in enumerate(self.sizes):
            yield slice(off, off + s), float(self.breaks[k]), float(self.breaks[k + 1])
            off += s

    def describe(self) -> dict:
        return {"n": self.n, "lower": self.lower, "upper": self.upper, "panels": len(self.sizes)}


def gauss_rule(n: int, lower: float, upper: float) -> QuadratureRule:
    """n-point Gauss-Legendre rule mapped affinely onto ``(lower, upper)``."""
    if int(n) != n or n < 2:
        raise ParameterError(f"gauss_rule needs an integer n >= 2, got {n}")
    if not (math.isfinite(lower) and math.isfinite(upper)) or not lower < upper:
        raise ParameterError(f"degenerate interval ({lower}, {upper})")
    x, w = gauss_legendre(int(n))
    h = 0.5 * (upper - lower)
    return QuadratureRule(
        float(lower),
        float(upper),
        lower + h * (x + 1.0),
        h * w,
        np.array([lower, upper], dtype=float),
        (int(n),),
    )


def composite_rule(
    n: int, lower: float, upper: float, order: int = PANEL_ORDER, graded: int = 0,
    ratio: float = 0.2,
) -> QuadratureRule:
    """Split ``(lower, upper)`` into panels of about ``order`` nodes each.

    The panels are equal except that the last ``graded`` of them shrink
    geometrically (factor ``ratio``) toward ``upper``, which restores fast
    convergence against an algebraic endpoint singularity there.
    """
    if int(n) != n or n < 2:
        raise ParameterError(f"composite_rule needs an integer n >= 2, got {n}")
    n = int(n)
    m = max(1, round(n / order))
    sizes = [n // m + (1 if k < n % m else 0) for k in range(m)]
    if min(sizes) < 2:
        return gauss_rule(n, lower, upper)
    g = min(graded, m - 1)
    u = m - g  # uniform panels; the last of them is cut geometrically
    width = (upper - lower) / u
    edges = list(lower + width * np.arange(u))
    tail = [upper - width * ratio**k for k in range(1, g + 1)]
    breaks = np.array(edges + tail + [upper], dtype=float)
    parts = [gauss_rule(s, breaks[k], breaks[k + 1]) for k, s in enumerate(sizes)]
    return QuadratureRule(
        float(lower),
        float(upper),
        np.concatenate([r.nodes for r in parts]),
        np.concatenate([r.weights for r in parts]),
        breaks,
        tuple(sizes),
    )


def truncation_bound(mu: float, lam: float, eps: float) -> float:
    """Smallest ``Y`` with ``r_inf(Y) = exp(-Y**2 - 2 rho Y) <= eps``."""
    if not 0 < eps < 1:
        raise ParameterError(f"eps must lie in (0, 1), got {eps}")
    if lam <= 0:
        raise ParameterError("lambda must be > 0")
    rho = mu / lam
    return -rho + math.sqrt(rho * rho + math.log(1.0 / eps))


def frame_domain(p: GribovParams, frame: KernelFrame, eps: float = DEFAULT_EPS) -> tuple[float, float]:
    """Interval a frame's matrix lives on.

    The limit frame is truncated where ``r_inf`` drops below ``eps``; for
    ``lambda' > 0`` the kernel also vanishes beyond ``rho'``.
    """
    frame = KernelFrame.parse(frame)
    frame.check(p)
    if frame.tag is FrameTag.LIMIT:
        ymax = truncation_bound(p.mu, p.lam, eps)
        if not p.is_limit:
            ymax = min(ymax, p.rho_prime)
        return 0.0, ymax
    if p.is_limit:
        raise ParameterError("plain frame with lambda_prime = 0 needs an explicit rule")
    return 0.0, p.rho_prime


def frame_rule(
    p: GribovParams, frame: KernelFrame | str, n: int = DEFAULT_N, eps: float = DEFAULT_EPS
) -> QuadratureRule:
    """Default rule for a frame: panels graded toward ``rho'`` when the rule reaches it."""
    lo, hi = frame_domain(p, KernelFrame.parse(frame), eps)
    reaches_end = not p.is_limit and hi >= p.rho_prime
    return composite_rule(n, lo, hi, graded=GRADED_PANELS if reaches_end else 0)


# --------------------------------------------------------------------------
# node data shared by the assembly routines


@dataclass
class _KernelData:
    """Logs of Theta, W and the frame scaling, as callables of position."""

    p: GribovParams
    frame: KernelFrame

    def log_theta(self, y):
        if self.p.is_limit:
            return K.log_theta_limit(y, self.p.rho)
        return K.log_theta(y, self.p)

    def log_W(self, y):
        y = np.asarray(y, dtype=float)
        with np.errstate(divide="ignore"):
            if self.p.is_limit:
                return -0.5 * y * y - self.p.rho * y - np.log(self.p.lam) - np.log(y)
            return 0.5 * K.log_weight_r(y, self.p) - np.log(self.p.lam) - np.log(y)

    def log_scale(self, y):
        if self.frame.tag is FrameTag.NATIVE:
            return 0.5 * K.log_weight_r(y, self.p)
        if self.frame.tag is FrameTag.LIMIT:
            return 0.5 * K.log_weight_r_inf(y, self.p.rho)
        return np.zeros(np.shape(y))

    def support_end(self) -> float:
        return math.inf if self.p.is_limit else self.p.rho_prime


def _ref_first(p: int) -> float:
    return float(gauss_legendre(p)[0][0])


def _barycentric_matrix(nodes: np.ndarray, weights: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """L[k, j] = l_j(pts[k]) for the Lagrange basis on Gauss nodes."""
    # barycentric weights of Gauss-Legendre points: (-1)^j sqrt((1 - x_j^2) w_j),
    # with x_j on the reference interval (Gauss nodes are symmetric in the panel)
    c = 0.5 * (nodes[0] + nodes[-1])
    h = 0.5 * (nodes[-1] - nodes[0])
    x = (nodes - c) / h if h > 0 else np.zeros_like(nodes)
    x = x * abs(_ref_first(nodes.size))
    lam = (-1.0) ** np.arange(nodes.size) * np.sqrt(np.clip(1 - x * x, 0, None) * weights)
    diff = pts[:, None] - nodes[None, :]
    hit = diff == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        t = lam[None, :] / diff
        L = t / t.sum(axis=1, keepdims=True)
    rows = hit.any(axis=1)
    if np.any(rows):
        L[rows] = hit[rows].astype(float)
    return L


def _local_blocks(rule: QuadratureRule, data: _KernelData, log_th: np.ndarray, order2: int):
    """Product-integration weights for every panel.

    Returns a list of ``(slice, C)`` with ``C[i, j]`` such that, for row ``i``
    of the panel, ``sum_j C[i, j] * G_j f_j`` approximates the part of
    ``(K f)(y_i)`` coming from inside that panel.
    """
    blocks = []
    for sl, a, b in rule.panels():
        y = rule.nodes[sl]
        w = rule.weights[sl]
        p = y.size
        xg1, wg1 = gauss_legendre(p)
        xg2, wg2 = gauss_legendre(order2)
        # left halves [a, y_i]: plain Gauss on the interpolant of G f
        h1 = 0.5 * (y - a)
        s1 = a + h1[:, None] * (xg1[None, :] + 1)
        u1 = h1[:, None] * wg1[None, :]
        L1 = _barycentric_matrix(y, w, s1.ravel()).reshape(p, p, p)
        C = np.einsum("ik,ikj->ij", u1, L1)
        # right halves [y_i, b]: weight Theta(y_i)/Theta(s) times interpolant
        h2 = 0.5 * (b - y)
        s2 = y[:, None] + h2[:, None] * (xg2[None, :] + 1)
        lth_s2 = data.log_theta(s2.ravel()).reshape(p, order2)
        E = np.exp(log_th[sl][:, None] - lth_s2)
        u2 = h2[:, None] * wg2[None, :] * E
        L2 = _barycentric_matrix(y, w, s2.ravel()).reshape(p, order2, p)
        C += np.einsum("ik,ikj->ij", u2, L2)
        blocks.append((sl, C))
    return blocks


TAIL_ORDER = 2


def _tail_moments(data: _KernelData, b: float, tol: float = 1e-14) -> np.ndarray:
    """``int_b^end W(t) (t - b)**k / k! dt`` for k = 0..TAIL_ORDER: the mass cut by truncation."""
    end = data.support_end()
    if end <= b:
        return np.zeros(TAIL_ORDER + 1)
    if math.isinf(end):
        end = b + max(b, 10.0)
    out = []
    for k in range(TAIL_ORDER + 1):
        with np.errstate(divide="ignore"):
            lm = log_quad(lambda t: data.log_W(t) + k * np.log(t - b), b, end, tol=tol)[0]
        out.append(math.exp(lm) / math.factorial(k))
    return np.array(out)


def _endpoint_basis(nodes: np.ndarray, weights: np.ndarray, x: float) -> np.ndarray:
    """Rows k = 0..TAIL_ORDER hold the k-th derivatives of the Lagrange basis at ``x``.

    ``x`` must not be a node; then ``l_j(x) = c_j prod_{m != j} (x - x_m)``.
    """
    ell = _barycentric_matrix(nodes, weights, np.array([x]))[0]
    inv = 1.0 / (x - nodes)
    s1 = inv.sum() - inv
    s2 = (inv * inv).sum() - inv * inv
    return np.vstack([ell, ell * s1, ell * (s1 * s1 - s2)])[: TAIL_ORDER + 1]


# --------------------------------------------------------------------------
# operator matrix


@dataclass(frozen=True)
class OperatorMatrix:
    params: GribovParams
    frame: KernelFrame
    rule: QuadratureRule
    entries: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.entries.setflags(write=False)

    @property
    def n(self) -> int:
        return self.rule.n

    def to_frame_vector(self, f_nodes: np.ndarray) -> np.ndarray:
        """Map nodal values of a plain-frame function into this frame."""
        return np.asarray(f_nodes) * np.exp(_KernelData(self.params, self.frame).log_scale(self.rule.nodes))

    def from_frame_vector(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(v) * np.exp(-_KernelData(self.params, self.frame).log_scale(self.rule.nodes))


def _validate_rule(p: GribovParams, frame: KernelFrame, rule: QuadratureRule) -> None:
    tol = 1e-12 * max(1.0, abs(rule.upper))
    if abs(rule.lower) > tol:
        raise ParameterError("rule must start at 0")
    if frame.tag is FrameTag.NATIVE or (frame.tag is FrameTag.PLAIN and not p.is_limit):
        if abs(rule.upper - p.rho_prime) > tol:
            raise ParameterError(f"rule must cover [0, rho'={p.rho_prime}], got upper={rule.upper}")
    elif not p.is_limit and rule.upper > p.rho_prime + tol:
        raise ParameterError("limit-frame rule for lambda' > 0 must stay inside [0, rho']")


def assemble(
    p: GribovParams,
    frame: KernelFrame | str,
    rule: QuadratureRule,
    *,
    scheme: str = "product",
    tail: bool = True,
) -> OperatorMatrix:
    """Discretise the inverse operator in ``frame`` on ``rule``.

    ``scheme="nystrom"`` gives ``entries[i, j] = T(y_i, y_j) * w_j`` exactly.
    ``scheme="product"`` (default) splits each row at its diagonal node as
    described in the module docstring and converges spectrally.

    With ``tail=True`` and a rule that stops short of the kernel's support
    (truncated limit frame), the discarded part ``int_b^end W f`` is closed
    by holding ``f`` at its value on the last node.
    """
    frame = KernelFrame.parse(frame)
    frame.check(p)
    if scheme not in ("product", "nystrom"):
        raise ParameterError(f"unknown scheme {scheme!r}")
    _validate_rule(p, frame, rule)
    data = _KernelData(p, frame)
    y, w = rule.nodes, rule.weights

    log_th = data.log_theta(y)
    log_W = data.log_W(y)
    ld = data.log_scale(y)
    if not (np.all(np.isfinite(log_th)) and np.all(np.isfinite(log_W))):
        bad = np.flatnonzero(~(np.isfinite(log_th) & np.isfinite(log_W)))[0]
        raise NumericalError(f"non-finite kernel factor at node {bad} (y={y[bad]!r})")

    # plain rule everywhere: w_j Theta(min) W_j * e^{ld_i - ld_j}
    log_th_min = np.minimum.outer(log_th, log_th)  # Theta is increasing
    logT = log_th_min + (log_W - ld)[None, :] + ld[:, None]
    with np.errstate(over="ignore"):
        entries = w[None, :] * np.exp(logT)

    if scheme == "product":
        log_G = log_th + log_W
        for sl, C in _local_blocks(rule, data, log_th, order2=2 * max(rule.sizes)):
            with np.errstate(over="ignore"):
                scale = np.exp(log_G[sl][None, :] + ld[sl][:, None] - ld[sl][None, :])
            entries[sl, sl] = C * scale

    truncated = False
    if tail and frame.tag is not FrameTag.NATIVE:
        moments = _tail_moments(data, rule.upper)
        if moments[0] > 0:
            # int_b^end Theta(y_i) W(t) f(t) dt with f replaced by its Taylor
            # polynomial at b, read off the last panel's interpolant
            truncated = True
            sl = list(rule.panels())[-1][0]
            coef = moments @ _endpoint_basis(y[sl], w[sl], rule.upper)
            entries[:, sl] += np.exp(log_th + ld)[:, None] * (coef * np.exp(-ld[sl]))[None, :]

    if not np.all(np.isfinite(entries)):
        i, j = np.argwhere(~np.isfinite(entries))[0]
        raise NumericalError(f"overflow in assembly at node pair ({i}, {j})")

    meta = {
        "scheme": scheme,
        "log_domain": True,
        "tail_closure": truncated,
        "panels": len(rule.sizes),
    }
    return OperatorMatrix(p, frame, rule, entries, meta)


# --------------------------------------------------------------------------
# direct action on a source function (split at the diagonal)


def apply_plain(
    p: GribovParams,
    f: Callable[[np.ndarray], np.ndarray],
    y,
    n: int = DEFAULT_N,
) -> np.ndarray:
    """``u = K f`` at the points ``y`` with the integral split at ``y``.

    ``u(y) = int_0^y G f dt + Theta(y) int_y^rho' W f dt`` where each piece is
    an ``n``-point Gauss rule on a panel free of the diagonal kink.  ``f`` is
    a vectorised callable with ``f(0) = 0``.
    """
    p.require_native()
    rp = p.rho_prime
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any(y < 0) or np.any(y > rp):
        raise DomainError("apply_plain points must lie in [0, rho']")
    f0 = float(np.asarray(f(np.array([0.0])))[0])
    probe = np.abs(np.asarray(f(np.linspace(0, rp, 11)), dtype=float)).max()
    if abs(f0) > 1e-14 * max(1.0, probe):
        raise ParameterError(f"source must vanish at 0, got f(0) = {f0}")

    data = _KernelData(p, KernelFrame(FrameTag.PLAIN))
    x, wg = gauss_legendre(int(n))
    out = np.zeros(y.shape)

    h1 = 0.5 * y
    s1 = h1[:, None] * (x[None, :] + 1)
    h2 = 0.5 * (rp - y)
    s2 = y[:, None] + h2[:, None] * (x[None, :] + 1)

    lth_y = np.where(y > 0, 0.0, -np.inf)
    pos = y > 0
    lth_y[pos] = data.log_theta(np.minimum(y[pos], np.nextafter(rp, 0)))
    lth_s1 = data.log_theta(s1.ravel()).reshape(s1.shape)
    lW1 = data.log_W(s1.ravel()).reshape(s1.shape)
    lW2 = data.log_W(s2.ravel()).reshape(s2.shape)

    f1 = np.asarray(f(s1), dtype=float)
    f2 = np.asarray(f(s2), dtype=float)
    with np.errstate(invalid="ignore"):
        part1 = h1 * np.sum(wg[None, :] * f1 * np.exp(lth_s1 + lW1), axis=1)
        part2 = h2 * np.sum(wg[None, :] * f2 * np.exp(lth_y[:, None] + lW2), axis=1)
    out = np.where(pos, part1, 0.0) + np.where(pos, part2, 0.0)
    if not np.all(np.isfinite(out)):
        raise NumericalError("apply_plain produced non-finite values")
    return out


def interpolate_nodes(rule: QuadratureRule, values: np.ndarray, pts) -> np.ndarray:
    """Evaluate the panelwise Lagrange interpolant of nodal ``values`` at ``pts``."""
    pts = np.atleast_1d(np.asarray(pts, dtype=float))
    out = np.empty(pts.shape)
    idx = np.clip(np.searchsorted(rule.breaks, pts, side="right") - 1, 0, len(rule.sizes) - 1)
    for k, (sl, a, b) in enumerate(rule.panels()):
        sel = idx == k
        if np.any(sel):
            L = _barycentric_matrix(rule.nodes[sl], rule.weights[sl], pts[sel])
            out[sel] = L @ np.asarray(values)[sl]
    return out


def nystrom_matrix(kernel: Callable[[np.ndarray, np.ndarray], np.ndarray], rule: QuadratureRule) -> np.ndarray:
    """``kernel(y_i, y_j) * w_j`` for an arbitrary vectorised kernel (surrogate tests)."""
    y = rule.nodes
    return np.asarray(kernel(y[:, None], y[None, :]), dtype=float) * rule.weights[None, :]
