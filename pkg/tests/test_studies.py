import numpy as np
import pytest

from gribov_spectra import kernels as K
from gribov_spectra.errors import ParameterError
from gribov_spectra.studies import (
    StudyKind,
    analyticity_probe,
    chebyshev_nodes,
    chebyshev_tail_ratio,
    hs_limit_study,
    kernel_limit_study,
    lambda_prime_limit,
    loglog_slope,
    loop_residual,
    non_increasing,
    recompute_flags,
    sweep_mu,
    unit_roots,
)


@pytest.fixture(scope="module")
def mu_report():
    return sweep_mu(1.0, 1.0, (0.5, 1.0, 2.0, 4.0), 100)


@pytest.fixture(scope="module")
def limit_report():
    return lambda_prime_limit(1.0, 1.0, (4.0, 8.0, 16.0, 32.0), 100)


def test_sweep_mu_flags(mu_report):
    assert mu_report.kind is StudyKind.MU_SWEEP
    assert mu_report.passed, mu_report.verdict()
    assert list(mu_report.column("mu")) == [0.5, 1.0, 2.0, 4.0]
    assert np.all(np.diff(mu_report.column("omega")) < 0)


def test_sweep_flags_are_recomputable(mu_report):
    assert recompute_flags(mu_report) == mu_report.flags
    tampered = type(mu_report)(mu_report.kind, mu_report.columns, mu_report.records[::-1],
                               provenance=mu_report.provenance)
    assert not recompute_flags(tampered)["monotone_omega_decreasing"]


def test_sweep_known_value(mu_report):
    omega = mu_report.column("omega")[1]
    assert omega == pytest.approx(0.650439101315218, rel=1e-10)


@pytest.mark.parametrize("grid", [(1.0,), (2.0, 1.0), (1.0, 1.0), (-1.0, 1.0)])
def test_sweep_rejects_bad_grid(grid):
    with pytest.raises(ParameterError):
        sweep_mu(1.0, 1.0, grid, 40)


def test_sweep_rejects_kernel_point_outside():
    with pytest.raises(ParameterError):
        sweep_mu(1.0, 1.0, (1.0, 2.0), 40, kernel_point=(0.5, 5.0))


def test_lambda_prime_limit(limit_report):
    r = limit_report
    assert r.flags["converging"] and r.flags["final_diff_below_quarter"]
    assert r.flags["omega_positive"]
    assert r.findings["omega0"] == pytest.approx(0.5480162943344866, rel=1e-9)
    # the approach is first order in lambda'
    assert 0.8 < r.findings["slope"] < 1.2
    assert recompute_flags(r) == r.flags


def test_hs_limit_matches_lambda_prime_columns(limit_report):
    rep = hs_limit_study(1.0, 1.0, (4.0, 8.0, 16.0, 32.0), 100)
    assert rep.passed
    np.testing.assert_allclose(rep.column("hs"), limit_report.column("hs"), rtol=1e-13)
    assert rep.findings["hs0"] == pytest.approx(limit_report.findings["hs0"], rel=1e-13)


def test_kernel_limit_study():
    pts = [(0.5, 0.7), (1.0, 1.5), (2.0, 0.3)]
    rep = kernel_limit_study(1.0, 1.0, (4.0, 8.0, 16.0, 32.0), pts)
    assert rep.flags["weight_distance_decreasing"] and rep.flags["kernel_distance_decreasing"]
    assert rep.flags["zero_row"]
    assert np.all(rep.column("zero_row_max") == 0)
    last = rep.records[-1]
    for k, (y, y1) in enumerate(pts):
        lim = float(K.kernel_limit(y, y1, 1.0, 1.0))
        assert rep.findings[f"kernel_limit_{k}"] == lim
        assert last[rep.columns.index(f"kernel_dist_{k}")] < 0.1 * lim


def test_kernel_monotonicity_in_rho_prime_is_point_dependent():
    # Measured, not assumed: at (0.5, 0.7) and (2.0, 0.3) the plain kernel decreases
    # along rho', at (1.0, 1.5) it increases toward its limit.
    rep = kernel_limit_study(1.0, 1.0, (4.0, 8.0, 16.0, 32.0), [(0.5, 0.7), (1.0, 1.5), (2.0, 0.3)])
    assert non_increasing(rep.column("kernel_0"))
    assert np.all(np.diff(rep.column("kernel_1")) > 0)
    assert non_increasing(rep.column("kernel_2"))
    assert not rep.flags["kernel_non_increasing_in_rho_prime"]
    single = kernel_limit_study(1.0, 1.0, (4.0, 8.0, 16.0, 32.0), [(0.5, 0.7)])
    assert single.passed


def test_kernel_limit_rejects_point_beyond_rho_prime():
    with pytest.raises(ParameterError):
        kernel_limit_study(1.0, 1.0, (4.0, 8.0), [(5.0, 0.5)])


def test_unit_roots_antipodal():
    z = unit_roots(16)
    assert np.array_equal(z[8:], -z[:8])
    np.testing.assert_allclose(z, np.exp(2j * np.pi * np.arange(16) / 16), atol=1e-15)


def test_constant_loop_is_exactly_zero():
    assert loop_residual(lambda m: 1.0 + 0.5j, 1.0, 0.5, 64) == 0.0


def test_loop_residual_decays_with_points():
    f = lambda m: 1.0 / (m - 2.0)  # noqa: E731 - pole outside the circle
    res = [loop_residual(f, 1.0, 0.5, m) for m in (8, 16, 32)]
    assert res[0] > res[1] > res[2]
    assert loop_residual(lambda m: 1.0 / (m - 1.2), 1.0, 0.5, 64) > 1.0  # pole inside


def test_chebyshev_tail_ratio():
    x = chebyshev_nodes(0.5, 4.0, 32)
    assert chebyshev_tail_ratio(np.exp(-x)) < 1e-14
    assert chebyshev_tail_ratio(np.abs(x - 2.0)) > 1e-5


def test_loglog_slope():
    x = np.array([1.0, 2.0, 4.0])
    assert loglog_slope(x, 3 * x**2) == pytest.approx(2.0)
    assert np.isnan(loglog_slope(x, np.array([1.0, 0.0, 1.0])))


def test_non_increasing_slack():
    assert non_increasing([1.0, 1.0 + 1e-14, 0.5])
    assert not non_increasing([1.0, 1.1])


@pytest.mark.slow
def test_analyticity_probe():
    rep = analyticity_probe(rule_size=60)
    assert rep.passed, rep.verdict()
    assert recompute_flags(rep) == rep.flags
    assert rep.findings["loop_residual"] < 1e-10
    assert list(rep.column("mu")) == sorted(rep.column("mu"))


def test_analyticity_rejects_loop_leaving_region():
    with pytest.raises(ParameterError):
        analyticity_probe(mu0=0.4, radius=0.5)
