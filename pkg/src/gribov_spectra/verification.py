"""The property suite behind ``gribov-spectra verify``.

Each check returns :class:`Check` rows with the measured value, the
threshold it is held to and the verdict.  Everything is deterministic: the
quasi-random points come from an unscrambled Halton sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import qmc

from . import kernels as K
from .discretize import DEFAULT_EPS, DEFAULT_N, frame_rule
from .params import derive_params
from .spectral import hs_norm, ode_residual, smallest_eigenvalue
from .studies import (
    DEFAULT_MU_GRID,
    DEFAULT_RHO_PRIME_GRID,
    analyticity_probe,
    kernel_limit_study,
    lambda_prime_limit,
    sweep_mu,
)

PARAM_GRID = tuple((lp, mu, 1.0) for lp in (1.0, 0.5, 0.25) for mu in DEFAULT_MU_GRID)
FORM_PARAMS = ((1.0, 1.0, 1.0), (0.5, 2.0, 1.0), (0.25, 1.0, 1.0))


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.value:.3e} (threshold {self.threshold:.3g}) {self.detail}".rstrip()


def halton_square(count: int, side: float, skip: int = 1) -> np.ndarray:
    """``count`` Halton points in ``(0, side)^2`` (the origin is skipped)."""
    h = qmc.Halton(d=2, scramble=False)
    if skip:
        h.fast_forward(skip)
    return h.random(count) * side


def check_form_equivalence(points: int = 10_000) -> list[Check]:
    out = []
    for args in FORM_PARAMS:
        p = derive_params(*args)
        pts = halton_square(points, p.rho_prime)
        a = K.kernel_N(pts[:, 0], pts[:, 1], p)
        b = K.kernel_N_unscaled(pts[:, 0], pts[:, 1], p)
        rel = float(np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300)))
        tag = "/".join("%g" % a for a in args)
        out.append(Check(f"form_equivalence[{tag}]", rel, 1e-12, rel < 1e-12))
    return out


def theta_end_products(p, ks=(2, 3, 4, 5)) -> np.ndarray:
    """``Theta(U) (rho' - U)**delta`` at ``U = rho' (1 - 10**-k)``."""
    rp = p.rho_prime
    u = rp * (1 - 10.0 ** -np.asarray(ks, dtype=float))
    return np.exp(K.log_theta(u, p) + p.delta * np.log(rp - u))


def successive_changes(values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    return np.abs(v[1:] / v[:-1] - 1.0)


def check_theta_asymptotics() -> list[Check]:
    p = derive_params(1.0, 1.0, 1.0)
    u = 1e-6 * p.rho_prime
    dev = abs(float(K.theta(u, p)) / u - 1.0)
    changes = successive_changes(theta_end_products(p))
    stable = bool(changes[-1] < 0.01 and np.all(np.diff(changes) < 0))
    return [
        Check("theta_small_ratio", dev, 1e-4, dev < 1e-4),
        Check("theta_endpoint_stabilizes", float(changes[-1]), 1e-2, stable,
              "changes " + " ".join(f"{c:.2e}" for c in changes)),
    ]


def check_hs(n_coarse: int = 100, n_fine: int = 200) -> list[Check]:
    worst_conv, worst_bound, ok = 0.0, 0.0, True
    for args in PARAM_GRID:
        p = derive_params(*args)
        h1 = hs_norm(p, "native", frame_rule(p, "native", n_coarse))
        h2 = hs_norm(p, "native", frame_rule(p, "native", n_fine))
        hl = hs_norm(p, "limit", frame_rule(p, "limit", n_fine))
        om = smallest_eigenvalue(p, n=n_fine).omega
        conv = abs(h1 - h2) / h2
        worst_conv = max(worst_conv, conv)
        worst_bound = max(worst_bound, om / h2, om / hl)
        ok &= bool(np.isfinite(h2) and conv < 1e-6 and om <= h2 and om <= hl)
    return [
        Check("hs_self_convergence", worst_conv, 1e-6, ok and worst_conv < 1e-6),
        Check("omega_le_hs", worst_bound, 1.0, worst_bound <= 1.0, "max Omega/HS"),
    ]


def check_jentzsch(n: int = DEFAULT_N) -> list[Check]:
    worst_gap, max_it, pos, sig = 0.0, 0, True, True
    for args in PARAM_GRID:
        res = smallest_eigenvalue(derive_params(*args), n=n, max_iter=10_000)
        worst_gap = max(worst_gap, res.gap)
        max_it = max(max_it, res.iterations)
        pos &= bool(np.all(res.eigenvector > 0))
        sig &= res.sigma > 0
    return [
        Check("power_iterations", float(max_it), 1e4, max_it <= 10_000),
        Check("eigenvector_positive", 0.0 if pos else 1.0, 0.0, pos),
        Check("subdominant_gap", worst_gap, 1 - 1e-3, worst_gap <= 1 - 1e-3),
        Check("sigma_positive", 0.0 if sig else 1.0, 0.0, sig),
    ]


def check_frame_invariance(n: int = DEFAULT_N) -> list[Check]:
    p = derive_params(1.0, 1.0, 1.0)
    a = smallest_eigenvalue(p, n=n, frame="native").omega
    b = smallest_eigenvalue(p, n=n, frame="limit").omega
    rel = abs(a - b) / a
    return [Check("frame_invariance", rel, 1e-8, rel < 1e-8)]


def check_mu_monotonicity(n: int = DEFAULT_N) -> list[Check]:
    rep = sweep_mu(1.0, 1.0, DEFAULT_MU_GRID, n)
    return [
        Check(f"mu_{name}", 0.0 if ok else 1.0, 0.0, ok)
        for name, ok in rep.flags.items()
        if name in ("monotone_sigma_increasing", "monotone_omega_decreasing", "kernel_non_increasing")
    ]


def check_lambda_prime_limit(n: int = DEFAULT_N) -> list[Check]:
    rep = lambda_prime_limit(1.0, 1.0, DEFAULT_RHO_PRIME_GRID, n, DEFAULT_EPS, with_hs=False)
    diff = rep.column("omega_diff")
    klim = kernel_limit_study(1.0, 1.0, DEFAULT_RHO_PRIME_GRID, [(0.5, 0.7), (1.0, 1.5), (2.0, 0.3)])
    return [
        Check("omega_diff_decreasing", float(diff[-1]), float(diff[0]), rep.flags["converging"]),
        Check("omega_diff_final_ratio", float(diff[-1] / diff[0]), 0.25, rep.flags["final_diff_below_quarter"],
              f"slope {rep.findings['slope']:.3f}"),
        Check("weight_distance_decreasing", 0.0, 0.0, klim.flags["weight_distance_decreasing"]),
        Check("kernel_distance_decreasing", 0.0, 0.0, klim.flags["kernel_distance_decreasing"]),
    ]


def check_ode_residual(n: int = DEFAULT_N) -> list[Check]:
    p = derive_params(1.0, 1.0, 1.0)
    y = np.linspace(0.05, 0.95, 50)
    f = lambda x: x  # noqa: E731
    from .spectral import fd_step

    h = fd_step(p)
    coarse = ode_residual(p, f, y, n=n // 2, h=2 * h)
    fine = ode_residual(p, f, y, n=n, h=h)
    order = float(np.log2(coarse / fine)) if fine > 0 else np.inf
    return [
        Check("ode_residual", fine, 1e-6, fine < 1e-6),
        Check("ode_residual_order", order, 1.0, order >= 1.0),
    ]


def check_analyticity(n: int = DEFAULT_N) -> list[Check]:
    rep = analyticity_probe(1.0, 1.0, 1.0, 0.5, 64, (0.5, 4.0), 32, rule_size=n)
    lr, cr = rep.findings["loop_residual"], rep.findings["chebyshev_tail_ratio"]
    return [
        Check("cauchy_loop_residual", lr, 1e-10, rep.flags["loop_residual_small"]),
        Check("chebyshev_tail_ratio", cr, 1e-8, rep.flags["chebyshev_decay"]),
    ]


SUITE: tuple[tuple[str, Callable[..., list[Check]]], ...] = (
    ("kernel-forms", check_form_equivalence),
    ("theta", check_theta_asymptotics),
    ("hilbert-schmidt", check_hs),
    ("jentzsch", check_jentzsch),
    ("frames", check_frame_invariance),
    ("mu-monotonicity", check_mu_monotonicity),
    ("lambda-prime-limit", check_lambda_prime_limit),
    ("ode", check_ode_residual),
    ("analyticity", check_analyticity),
)


def run_suite(n: int = DEFAULT_N) -> list[tuple[str, Check]]:
    out = []
    for group, fn in SUITE:
        kwargs = {} if fn in (check_form_equivalence, check_theta_asymptotics) else {"n": n}
        if fn is check_hs:
            kwargs = {"n_coarse": n // 2, "n_fine": n}
        for c in fn(**kwargs):
            out.append((group, c))
    return out
