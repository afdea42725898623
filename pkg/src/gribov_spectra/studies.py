"""Parameter sweeps: monotonicity in mu, the lambda' -> 0 limit, analyticity probes.

Every report keeps its raw records and rebuilds its flags from them through
:func:`recompute_flags`, so a flag can always be audited against the table
it came from.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import chebyshev

from . import kernels as K
from .discretize import DEFAULT_EPS, DEFAULT_N, frame_rule, truncation_bound
from .errors import GribovError, ParameterError
from .params import derive_params
from .spectral import DEFAULT_TOL, hs_norm, smallest_eigenvalue

FLAG_SLACK = 1e-12
DEFAULT_MU_GRID = (0.5, 1.0, 2.0, 4.0)
DEFAULT_RHO_PRIME_GRID = (4.0, 8.0, 16.0, 32.0)
DEFAULT_KERNEL_POINT = (0.5, 0.7)
LOOP_THRESHOLD = 1e-10
CHEB_THRESHOLD = 1e-8


class StudyKind(enum.Enum):
    MU_SWEEP = "mu-sweep"
    LAMBDA_PRIME_LIMIT = "lambda-prime-limit"
    KERNEL_LIMIT = "kernel-limit"
    HS_LIMIT = "hs-limit"
    ANALYTICITY = "analyticity"


@dataclass
class StudyReport:
    """Ordered records of a sweep plus the flags derived from them.

    ``aux`` holds secondary tables (the Cauchy loop samples of an analyticity
    probe, for example) in the same ``(columns, rows)`` shape as the main one.
    """

    kind: StudyKind
    columns: tuple[str, ...]
    records: list[tuple]
    flags: dict[str, bool] = field(default_factory=dict)
    findings: dict[str, float] = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    aux: dict[str, tuple[tuple[str, ...], list[tuple]]] = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        k = self.columns.index(name)
        return np.array([r[k] for r in self.records], dtype=float)

    def verdict(self) -> str:
        return "\n".join(f"{'PASS' if ok else 'FAIL'} {name}" for name, ok in self.flags.items())

    @property
    def passed(self) -> bool:
        return all(self.flags.values())


# --------------------------------------------------------------------------
# comparisons used by the flags


def strictly_increasing(x) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(np.diff(x) > 0))


def strictly_decreasing(x) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(np.diff(x) < 0))


def non_increasing(x, slack: float = FLAG_SLACK) -> bool:
    """``x[k+1] <= x[k]`` up to ``slack`` relative to ``max(1, |x[k]|)``."""
    x = np.asarray(x, dtype=float)
    return bool(np.all(x[1:] <= x[:-1] + slack * np.maximum(1.0, np.abs(x[:-1]))))


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if x.size < 2 or np.any(x <= 0) or np.any(y <= 0):
        return math.nan
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def recompute_flags(report: StudyReport) -> dict[str, bool]:
    """Flags of ``report`` rebuilt from its records (and thresholds in provenance)."""
    kind = report.kind
    if kind is StudyKind.MU_SWEEP:
        flags = {
            "monotone_sigma_increasing": strictly_increasing(report.column("sigma")),
            "monotone_omega_decreasing": strictly_decreasing(report.column("omega")),
            "sigma_positive": bool(np.all(report.column("sigma") > 0)),
            "gap_below_one": bool(np.all(report.column("gap") < 1)),
        }
        if "kernel" in report.columns:
            flags["kernel_non_increasing"] = non_increasing(report.column("kernel"))
        return flags
    if kind is StudyKind.LAMBDA_PRIME_LIMIT:
        diff = report.column("omega_diff")
        flags = {
            "converging": strictly_decreasing(diff),
            "final_diff_below_quarter": bool(diff[-1] < 0.25 * diff[0]),
            "omega_positive": bool(np.all(report.column("omega") > 0)),
        }
        if "hs_diff" in report.columns:
            flags["hs_converging"] = strictly_decreasing(report.column("hs_diff"))
        return flags
    if kind is StudyKind.HS_LIMIT:
        return {
            "hs_finite": bool(np.all(np.isfinite(report.column("hs")))),
            "hs_converging": strictly_decreasing(report.column("hs_diff")),
        }
    if kind is StudyKind.KERNEL_LIMIT:
        npts = report.provenance["sample_count"]
        wd = np.array([report.column(f"weight_dist_{k}") for k in range(npts)])
        kd = np.array([report.column(f"kernel_dist_{k}") for k in range(npts)])
        kv = np.array([report.column(f"kernel_{k}") for k in range(npts)])
        return {
            "weight_distance_decreasing": all(strictly_decreasing(r) for r in wd),
            "kernel_distance_decreasing": all(strictly_decreasing(r) for r in kd),
            "kernel_non_increasing_in_rho_prime": all(non_increasing(r) for r in kv),
            "zero_row": bool(np.all(report.column("zero_row_max") == 0)),
        }
    if kind is StudyKind.ANALYTICITY:
        cols, rows = report.aux["loop"]
        loop = np.array(rows, dtype=float)
        values = loop[:, cols.index("n_re")] + 1j * loop[:, cols.index("n_im")]
        dmu = loop[:, cols.index("dmu_re")] + 1j * loop[:, cols.index("dmu_im")]
        res = loop_residual_from_samples(values, dmu)
        omega = report.column("omega")[::-1]  # records ascend in mu; nodes descend
        ratio = chebyshev_tail_ratio(omega)
        prov = report.provenance
        return {
            "loop_residual_small": bool(res < prov["loop_threshold"]),
            "chebyshev_decay": bool(ratio < prov["cheb_threshold"]),
        }
    raise ParameterError(f"unknown study kind {kind!r}")


def _finish(report: StudyReport) -> StudyReport:
    report.flags = recompute_flags(report)
    return report


def _provenance(**extra) -> dict:
    from . import __version__

    return {"version": __version__, **extra}


def _check_grid(grid: Sequence[float], name: str) -> tuple[float, ...]:
    g = tuple(float(v) for v in grid)
    if len(g) < 2:
        raise ParameterError(f"{name} needs at least two values")
    if not strictly_increasing(g):
        raise ParameterError(f"{name} must be strictly increasing, got {g}")
    return g


# --------------------------------------------------------------------------
# mu sweep


def sweep_mu(
    lambda_prime: float,
    lam: float,
    mu_grid: Sequence[float] = DEFAULT_MU_GRID,
    rule_size: int = DEFAULT_N,
    *,
    tol: float = DEFAULT_TOL,
    eps: float = DEFAULT_EPS,
    kernel_point: tuple[float, float] | None = DEFAULT_KERNEL_POINT,
) -> StudyReport:
    """Omega, sigma and the gap along ``mu_grid``, plus the plain kernel at a point.

    Expected shape: sigma increasing and Omega decreasing in mu, and the
    kernel value non-increasing.
    """
    grid = _check_grid(mu_grid, "mu_grid")
    if any(m <= 0 for m in grid):
        raise ParameterError("mu_grid must be positive")
    params = [derive_params(lambda_prime, m, lam) for m in grid]
    if kernel_point is not None and lambda_prime > 0:
        y, y1 = kernel_point
        if not (0 <= y <= params[0].rho_prime and 0 < y1 < params[0].rho_prime):
            raise ParameterError(f"kernel point {kernel_point} outside [0, rho']^2")
    else:
        kernel_point = None

    rows = []
    for m, p in zip(grid, params):
        try:
            res = smallest_eigenvalue(p, n=rule_size, tol=tol, eps=eps)
        except GribovError as exc:
            raise type(exc)(f"sweep_mu failed at mu={m}: {exc}") from exc
        row = (m, res.omega, res.sigma, res.gap, res.residual)
        if kernel_point is not None:
            row += (float(K.kernel_N(kernel_point[0], kernel_point[1], p)),)
        rows.append(row)
    columns = ("mu", "omega", "sigma", "gap", "residual")
    if kernel_point is not None:
        columns += ("kernel",)
    prov = _provenance(
        lambda_prime=lambda_prime, lam=lam, n=rule_size, tol=tol, eps=eps,
        kernel_point=kernel_point, interpretation="omega decreasing, sigma increasing in mu",
    )
    return _finish(StudyReport(StudyKind.MU_SWEEP, columns, rows, provenance=prov))


# --------------------------------------------------------------------------
# lambda' -> 0


def limit_omega(mu: float, lam: float, rule_size: int = DEFAULT_N, eps: float = DEFAULT_EPS,
                tol: float = DEFAULT_TOL) -> float:
    """Spectral radius of the lambda' = 0 operator on ``[0, Y_max]``."""
    p0 = derive_params(0.0, mu, lam)
    return smallest_eigenvalue(p0, frame="limit", n=rule_size, eps=eps, tol=tol).omega


def _limit_frame_runs(mu, lam, grid, rule_size, eps, tol, with_omega=True):
    out = []
    for rp in grid:
        p = derive_params(lam / rp, mu, lam)
        rule = frame_rule(p, "limit", rule_size, eps)
        om = None
        if with_omega:
            try:
                om = smallest_eigenvalue(p, rule, frame="limit", tol=tol).omega
            except GribovError as exc:
                raise type(exc)(f"lambda' limit study failed at rho'={rp}: {exc}") from exc
        out.append((rp, p, rule, om))
    return out


def lambda_prime_limit(
    mu: float,
    lam: float,
    rho_prime_grid: Sequence[float] = DEFAULT_RHO_PRIME_GRID,
    rule_size: int = DEFAULT_N,
    eps_trunc: float = DEFAULT_EPS,
    *,
    tol: float = DEFAULT_TOL,
    with_hs: bool = True,
) -> StudyReport:
    """|Omega(lambda') - Omega_0| along increasing rho' = lambda/lambda'.

    Everything lives in the limit frame on ``[0, min(rho', Y_max)]``; the
    finite-rho' kernel is zero beyond rho'.  The log-log slope of the
    difference against ``1/rho'`` is reported as a finding.
    """
    grid = _check_grid(rho_prime_grid, "rho_prime_grid")
    if mu <= 0 or lam <= 0:
        raise ParameterError("mu and lambda must be positive")
    ymax = truncation_bound(mu, lam, eps_trunc)
    omega0 = limit_omega(mu, lam, rule_size, eps_trunc, tol)
    hs0 = None
    if with_hs:
        p0 = derive_params(0.0, mu, lam)
        hs0 = hs_norm(p0, "limit", frame_rule(p0, "limit", rule_size, eps_trunc))
    rows = []
    for rp, p, rule, om in _limit_frame_runs(mu, lam, grid, rule_size, eps_trunc, tol):
        row = (rp, p.lambda_prime, p.delta, om, abs(om - omega0))
        if with_hs:
            hs = hs_norm(p, "limit", rule)
            row += (hs, abs(hs - hs0))
        rows.append(row)
    columns = ("rho_prime", "lambda_prime", "delta", "omega", "omega_diff")
    if with_hs:
        columns += ("hs", "hs_diff")
    report = StudyReport(
        StudyKind.LAMBDA_PRIME_LIMIT,
        columns,
        rows,
        provenance=_provenance(mu=mu, lam=lam, n=rule_size, eps=eps_trunc, tol=tol, y_max=ymax),
    )
    report.findings = {
        "omega0": omega0,
        "slope": loglog_slope(1.0 / np.array(grid), report.column("omega_diff")),
    }
    if with_hs:
        report.findings["hs0"] = hs0
    return _finish(report)


def hs_limit_study(
    mu: float,
    lam: float,
    rho_prime_grid: Sequence[float] = DEFAULT_RHO_PRIME_GRID,
    rule_size: int = DEFAULT_N,
    eps_trunc: float = DEFAULT_EPS,
) -> StudyReport:
    """Limit-frame HS norms along rho' against the lambda' = 0 value on ``[0, Y_max]``."""
    grid = _check_grid(rho_prime_grid, "rho_prime_grid")
    p0 = derive_params(0.0, mu, lam)
    hs0 = hs_norm(p0, "limit", frame_rule(p0, "limit", rule_size, eps_trunc))
    rows = []
    for rp, p, rule, _ in _limit_frame_runs(mu, lam, grid, rule_size, eps_trunc, 0, False):
        hs = hs_norm(p, "limit", rule)
        rows.append((rp, hs, abs(hs - hs0)))
    report = StudyReport(
        StudyKind.HS_LIMIT,
        ("rho_prime", "hs", "hs_diff"),
        rows,
        findings={"hs0": hs0},
        provenance=_provenance(mu=mu, lam=lam, n=rule_size, eps=eps_trunc),
    )
    return _finish(report)


def kernel_limit_study(
    mu: float,
    lam: float,
    rho_prime_grid: Sequence[float] = DEFAULT_RHO_PRIME_GRID,
    sample_points: Sequence[tuple[float, float]] = (DEFAULT_KERNEL_POINT,),
) -> StudyReport:
    """Plain kernel and weight along rho' next to their lambda' = 0 limits.

    One record per rho'; for sample point ``k`` the columns ``kernel_k``,
    ``kernel_dist_k``, ``weight_k`` and ``weight_dist_k`` hold the kernel
    at ``(y, y1)``, its distance to the limit kernel, the weight ``r(y)`` and
    its distance to ``r_inf(y)``.  ``zero_row_max`` is the largest kernel
    value on the row ``y = 0`` over the sample ``y1`` values.
    """
    grid = _check_grid(rho_prime_grid, "rho_prime_grid")
    pts = [(float(a), float(b)) for a, b in sample_points]
    if not pts:
        raise ParameterError("need at least one sample point")
    for y, y1 in pts:
        if not (0 <= y < grid[0] and 0 < y1 < grid[0]):
            raise ParameterError(f"sample point {(y, y1)} not inside [0, {grid[0]})^2")
    rho = mu / lam
    lim_k = [float(K.kernel_limit(y, y1, mu, lam)) for y, y1 in pts]
    lim_w = [float(K.weight_r_inf(y, rho)) for y, _ in pts]
    rows = []
    for rp in grid:
        p = derive_params(lam / rp, mu, lam)
        row = [rp]
        for k, (y, y1) in enumerate(pts):
            kv = float(K.kernel_N(y, y1, p))
            wv = float(K.weight_r(y, p))
            row += [kv, abs(kv - lim_k[k]), wv, abs(wv - lim_w[k])]
        row.append(max(float(K.kernel_N(0.0, y1, p)) for _, y1 in pts))
        rows.append(tuple(row))
    columns = ["rho_prime"]
    for k in range(len(pts)):
        columns += [f"kernel_{k}", f"kernel_dist_{k}", f"weight_{k}", f"weight_dist_{k}"]
    columns.append("zero_row_max")
    report = StudyReport(
        StudyKind.KERNEL_LIMIT,
        tuple(columns),
        rows,
        findings={f"kernel_limit_{k}": v for k, v in enumerate(lim_k)}
        | {f"weight_limit_{k}": v for k, v in enumerate(lim_w)},
        provenance=_provenance(mu=mu, lam=lam, sample_points=pts, sample_count=len(pts)),
    )
    return _finish(report)


# --------------------------------------------------------------------------
# analyticity


def loop_samples(
    func: Callable[[complex], complex], mu0: float, radius: float, points: int
) -> tuple[np.ndarray, np.ndarray]:
    """Values of ``func`` on the circle ``|mu - mu0| = radius`` and the trapezoid ``dmu``."""
    if points < 2:
        raise ParameterError("loop needs at least two points")
    z = unit_roots(points)
    vals = np.array([complex(func(mu0 + radius * zk)) for zk in z])
    dmu = 1j * radius * z * (2 * np.pi / points)
    return vals, dmu


def unit_roots(m: int) -> np.ndarray:
    """``exp(2 pi i k / m)``; for even ``m`` the second half is the exact
    negative of the first, so antipodal contributions cancel bit for bit."""
    if m % 2:
        return np.exp(2j * np.pi * np.arange(m) / m)
    half = np.exp(2j * np.pi * np.arange(m // 2) / m)
    return np.concatenate([half, -half])


def loop_residual_from_samples(values: np.ndarray, dmu: np.ndarray) -> float:
    """``|sum values * dmu| / max |values|``, summed over antipodal pairs."""
    scale = float(np.max(np.abs(values)))
    if scale == 0:
        return 0.0
    terms = values * dmu
    m = terms.size
    if m % 2 == 0:
        terms = terms[: m // 2] + terms[m // 2 :]
    return float(abs(np.sum(terms)) / scale)


def loop_residual(func: Callable[[complex], complex], mu0: float, radius: float,
                  points: int = 64) -> float:
    """``|sum f(mu_k) dmu_k| / max |f|`` for the trapezoid rule on a circle."""
    return loop_residual_from_samples(*loop_samples(func, mu0, radius, points))


def chebyshev_nodes(a: float, b: float, m: int) -> np.ndarray:
    """First-kind Chebyshev points mapped to ``[a, b]``, in the order of ``k``."""
    k = np.arange(m)
    x = np.cos(np.pi * (k + 0.5) / m)
    return 0.5 * (a + b) + 0.5 * (b - a) * x


def chebyshev_tail_ratio(values_at_nodes) -> float:
    """Decay of the Chebyshev interpolant of samples at :func:`chebyshev_nodes`.

    Returns ``max |c_k|`` over the last eighth of the coefficients (at least
    one) divided by ``|c_0|``.
    """
    v = np.asarray(values_at_nodes, dtype=float)
    m = v.size
    x = np.cos(np.pi * (np.arange(m) + 0.5) / m)
    c = chebyshev.chebfit(x, v, m - 1)
    tail = max(1, m // 8)
    return float(np.max(np.abs(c[-tail:])) / abs(c[0]))


def analyticity_probe(
    lambda_prime: float = 1.0,
    lam: float = 1.0,
    mu0: float = 1.0,
    radius: float = 0.5,
    loop_points: int = 64,
    cheb_interval: tuple[float, float] = (0.5, 4.0),
    cheb_nodes: int = 32,
    *,
    kernel_point: tuple[float, float] = DEFAULT_KERNEL_POINT,
    rule_size: int = DEFAULT_N,
    tol: float = DEFAULT_TOL,
) -> StudyReport:
    """Cauchy loop of the plain kernel in complex mu, and Chebyshev decay of Omega(mu)."""
    if lambda_prime <= 0 or lam <= 0:
        raise ParameterError("analyticity probe needs lambda' > 0 and lambda > 0")
    if radius <= 0:
        raise ParameterError("radius must be positive")
    a, b = map(float, cheb_interval)
    if not 0 < a < b:
        raise ParameterError(f"cheb_interval must lie in (0, inf), got {cheb_interval}")
    rp = lam / lambda_prime
    # Re delta >= 0 and Re mu > 0 on the whole disc
    lowest = mu0 - radius
    if lowest <= 0 or rp * (lowest / lam + rp) - 1 < 0:
        raise ParameterError("Cauchy loop leaves the mu > 0, delta >= 0 region")
    y, y1 = kernel_point
    if not (0 <= y <= rp and 0 < y1 < rp):
        raise ParameterError(f"kernel point {kernel_point} outside [0, rho')^2")

    vals, dmu = loop_samples(
        lambda m: K.kernel_N_complex_mu(y, y1, rp, m, lam), mu0, radius, loop_points
    )
    loop_rows = [
        (float(t), float(v.real), float(v.imag), float(d.real), float(d.imag))
        for t, v, d in zip(np.angle(unit_roots(loop_points)), vals, dmu)
    ]

    nodes = chebyshev_nodes(a, b, cheb_nodes)
    omegas = []
    for m in nodes:
        p = derive_params(lambda_prime, float(m), lam)
        omegas.append(smallest_eigenvalue(p, n=rule_size, tol=tol).omega)
    rows = sorted(zip(nodes.tolist(), omegas))
    report = StudyReport(
        StudyKind.ANALYTICITY,
        ("mu", "omega"),
        rows,
        aux={"loop": (("theta", "n_re", "n_im", "dmu_re", "dmu_im"), loop_rows)},
        provenance=_provenance(
            lambda_prime=lambda_prime, lam=lam, mu0=mu0, radius=radius,
            loop_points=loop_points, cheb_interval=(a, b), cheb_nodes=cheb_nodes,
            kernel_point=kernel_point, n=rule_size, tol=tol,
            loop_threshold=LOOP_THRESHOLD, cheb_threshold=CHEB_THRESHOLD,
        ),
    )
    report.findings = {
        "loop_residual": loop_residual_from_samples(vals, dmu),
        "chebyshev_tail_ratio": chebyshev_tail_ratio(omegas),
    }
    return _finish(report)
