import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import adaptive_simpson, mp_kernel_limit, mp_kernel_N, mp_theta, mp_weight_r, rel

from gribov_spectra import derive_params
from gribov_spectra import kernels as K
from gribov_spectra.errors import DomainError, ParameterError

P111 = derive_params(1, 1, 1)
GRID = [derive_params(*a) for a in [(1, 1, 1), (0.5, 2, 1), (0.25, 1, 1)]]


# -- weights -----------------------------------------------------------------


def test_weight_r_endpoints():
    assert K.weight_r(0.0, P111) == 1.0
    assert K.weight_r(1.0, P111) == 0.0


def test_weight_r_against_mpmath():
    p = derive_params(0.1, 1, 1)  # rho' = 10, rho = 1
    assert rel(float(K.weight_r(0.5, p)), float(mp_weight_r(0.5, 10, p.delta))) < 1e-12


def test_weight_r_domain():
    with pytest.raises(DomainError):
        K.weight_r(1.5, P111)
    with pytest.raises(ParameterError):
        K.weight_r(0.5, derive_params(0, 1, 1))


def test_weight_r_inf():
    assert K.weight_r_inf(0.0, 1.0) == 1.0
    assert K.weight_r_inf(1.0, 1.0) == pytest.approx(math.exp(-3), rel=1e-15)
    with pytest.raises(DomainError):
        K.weight_r_inf(-0.1, 1.0)


def test_weight_converges_to_limit():
    d = [abs(K.weight_r(0.5, derive_params(1 / rp, 1, 1)) - K.weight_r_inf(0.5, 1)) for rp in (4, 8, 16, 32)]
    assert all(b < a for a, b in zip(d, d[1:]))
    assert d[-1] < 0.01


# -- Theta -------------------------------------------------------------------


def test_theta_zero_and_small():
    assert K.theta(0.0, P111) == 0.0
    u = 1e-6 * P111.rho_prime
    assert abs(K.theta(u, P111) / u - 1) < 1e-4


def test_theta_against_simpson():
    f = lambda s: math.exp(-s) * (1 - s) ** -2  # noqa: E731
    ref = adaptive_simpson(f, 0.0, 0.5, tol=1e-12)
    assert rel(float(K.theta(0.5, P111)), ref) < 1e-10


@pytest.mark.parametrize("p", GRID, ids=lambda p: f"rp{p.rho_prime}-d{p.delta}")
def test_theta_against_mpmath(p):
    for frac in (1e-9, 1e-3, 0.3, 0.9, 0.999):
        u = frac * p.rho_prime
        assert rel(float(K.theta(u, p)), float(mp_theta(u, p.rho_prime, p.delta))) < 1e-12


def test_theta_series_branch_is_continuous():
    # just below / above the switch to the small-argument series
    u = K.SMALL_UPSILON * P111.rho_prime
    lo, hi = K.theta(np.array([u * (1 - 1e-9), u * (1 + 1e-9)]), P111)
    assert rel(hi, lo) < 1e-8


def test_theta_large_delta_stays_finite():
    p = derive_params(1 / 32, 1, 1)  # delta = 1055
    lt = K.log_theta(np.array([1.0, 16.0, 31.9]), p)
    assert np.all(np.isfinite(lt)) and np.all(np.diff(lt) > 0)
    assert rel(math.exp(lt[0]), float(mp_theta(1.0, 32, p.delta, dps=40))) < 1e-11


def test_theta_domain():
    with pytest.raises(DomainError):
        K.theta(1.0, P111)
    with pytest.raises(DomainError):
        K.theta(-0.1, P111)


@given(st.lists(st.floats(0, 0.999), min_size=2, max_size=20, unique=True))
def test_theta_strictly_increasing(us):
    us = np.sort(np.array(us))
    assert np.all(np.diff(K.theta(us, P111)) > 0)


# -- plain kernel ------------------------------------------------------------


def test_kernel_zero_row():
    y1 = np.linspace(0.01, 1, 30)
    assert np.all(K.kernel_N(0.0, y1, P111) == 0)
    assert np.all(K.kernel_N_tilde(0.0, y1, P111) == 0)


def test_kernel_composition_oracle():
    # (1/(lambda y1)) e^{y1} (1 - y1)^1 Theta(y1) at (0.5, 0.25)
    th = adaptive_simpson(lambda s: math.exp(-s) * (1 - s) ** -2, 0.0, 0.25, tol=1e-13)
    expected = math.exp(0.25) * 0.75 * th / 0.25
    assert rel(float(K.kernel_N(0.5, 0.25, P111)), expected) < 1e-9


@pytest.mark.parametrize("p", GRID, ids=lambda p: f"rp{p.rho_prime}")
def test_two_printed_forms_agree(p):
    rng = np.random.default_rng(7)
    y, y1 = rng.uniform(0, p.rho_prime, (2, 10_000))
    a = K.kernel_N(y, y1, p)
    b = K.kernel_N_unscaled(y, y1, p)
    assert np.max(np.abs(a - b) / np.maximum(a, 1e-300)) < 1e-12


@pytest.mark.parametrize("pt", [(0.5, 0.7), (0.9, 0.2), (3.0, 3.5)])
def test_kernel_against_mpmath(pt):
    p = derive_params(0.25, 1, 1)
    got = float(K.kernel_N(*pt, p))
    assert rel(got, float(mp_kernel_N(*pt, 4, 1, 1))) < 1e-12


def test_kernel_endpoints():
    # y1 -> 0 with y > 0: Theta(y1)/y1 -> 1
    assert K.kernel_N(0.5, 0.0, P111) == pytest.approx(1.0)
    assert K.kernel_N(0.5, 1e-12, P111) == pytest.approx(1.0, rel=1e-9)
    # y1 = rho' kills the kernel for delta > 0
    assert K.kernel_N(0.5, 1.0, P111) == 0.0
    with pytest.raises(DomainError):
        K.kernel_N(1.0, 1.0, P111)
    with pytest.raises(DomainError):
        K.kernel_N(0.5, 1.2, P111)


@given(st.floats(0, 1), st.floats(0, 0.9999))
def test_kernels_nonnegative_and_tilde_identity(y, y1):
    n = K.kernel_N(y, y1, P111)
    t = K.kernel_N_tilde(y, y1, P111)
    assert n >= 0 and t >= 0
    if n > 0:
        assert rel(t * float(K.weight_r(y1, P111)), n) < 1e-12


def test_tilde_factor_oracle():
    th = float(mp_theta(0.25, 1, 1))
    expected = th / (0.25 * math.sqrt(float(mp_weight_r(0.25, 1, 1))))
    assert rel(float(K.kernel_N_tilde(0.5, 0.25, P111)), expected) < 1e-12


def test_kernel_monotone_in_rho_prime_and_converges():
    vals = [float(K.kernel_N(0.5, 0.7, derive_params(1 / rp, 1, 1))) for rp in (4, 8, 16, 32)]
    lim = float(K.kernel_limit(0.5, 0.7, 1, 1))
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    dist = [abs(v - lim) for v in vals]
    assert all(b < a for a, b in zip(dist, dist[1:]))


def test_kernel_non_increasing_in_mu():
    vals = [float(K.kernel_N(0.5, 0.7, derive_params(1, mu, 1))) for mu in (0.5, 1, 2, 4)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))


# -- symmetrised and limit kernels -------------------------------------------


@pytest.mark.parametrize("frame", ["native", "limit", "plain"])
def test_T_zero_row(frame):
    assert np.all(K.kernel_T(0.0, np.linspace(0.1, 0.9, 9), P111, frame) == 0)


def test_T_frames_are_similarity_transforms():
    rng = np.random.default_rng(3)
    y, y1 = rng.uniform(0.01, 0.99, (2, 200))
    n = K.kernel_N(y, y1, P111)
    tn = K.kernel_T(y, y1, P111, "native")
    tl = K.kernel_T(y, y1, P111, "limit")
    r, ri = K.weight_r, K.weight_r_inf
    np.testing.assert_allclose(tn, n * np.sqrt(r(y, P111) / r(y1, P111)), rtol=1e-12)
    np.testing.assert_allclose(tl, n * np.sqrt(ri(y, 1.0) / ri(y1, 1.0)), rtol=1e-12)


def test_T_limit_frame_cuts_outside_support():
    p = derive_params(0.25, 1, 1)
    assert K.kernel_T(2.0, 5.0, p, "limit") == 0.0
    assert K.kernel_T(5.0, 2.0, p, "limit") == 0.0
    with pytest.raises(ParameterError):
        K.kernel_T(0.5, 0.5, derive_params(0, 1, 1), "native")


def test_limit_kernel():
    assert K.kernel_limit(0.0, 0.7, 1, 1) == 0.0
    assert rel(float(K.kernel_limit(0.5, 0.25, 1, 1)), float(mp_kernel_limit(0.5, 0.25, 1, 1))) < 1e-10
    assert rel(float(K.kernel_limit(6.0, 5.0, 2, 1)), float(mp_kernel_limit(6.0, 5.0, 2, 1))) < 1e-12
    with pytest.raises(DomainError):
        K.kernel_limit(-1.0, 0.5, 1, 1)


def test_complex_mu_kernel_matches_real_kernel():
    for mu in (0.5, 1.0, 3.0):
        p = derive_params(1, mu, 1)
        z = K.kernel_N_complex_mu(0.5, 0.7, 1.0, complex(mu, 0), 1.0)
        assert abs(z.imag) < 1e-15
        assert rel(z.real, float(K.kernel_N(0.5, 0.7, p))) < 1e-12


def test_log_and_linear_agree():
    p = derive_params(0.5, 2, 1)
    y, y1 = np.meshgrid(np.linspace(0.1, 1.9, 7), np.linspace(0.1, 1.9, 7))
    np.testing.assert_allclose(np.exp(K.log_kernel_N(y, y1, p)), K.kernel_N(y, y1, p), rtol=1e-15)
    lin = np.exp(p.rho_prime * y1) * (1 - y1 / p.rho_prime) ** p.delta * K.theta(np.minimum(y, y1), p) / (p.lam * y1)
    np.testing.assert_allclose(K.kernel_N(y, y1, p), lin, rtol=1e-12)
