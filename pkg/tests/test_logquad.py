import math

import numpy as np
import pytest

from gribov_spectra.errors import ConvergenceError
from gribov_spectra.logquad import log_cumulative, log_quad, logsumexp


def test_logsumexp_matches_direct_sum():
    a = np.array([[0.1, -2.0, 3.0], [-np.inf, -np.inf, -np.inf]])
    out = logsumexp(a, axis=1)
    assert out[0] == pytest.approx(math.log(sum(math.exp(v) for v in a[0])), rel=1e-15)
    assert out[1] == -np.inf


def test_polynomial_and_exponential():
    v = log_quad(lambda x: 3 * np.log(x), 0.0, 2.0)
    assert math.exp(v[0]) == pytest.approx(4.0, rel=1e-14)
    # exp(1000 x) on [0, 1] overflows in linear space, not in log space
    v = log_quad(lambda x: 1000 * x, 0.0, 1.0)[0]
    assert v == pytest.approx(1000 - math.log(1000) + math.log1p(-math.exp(-1000)), rel=1e-14)


def test_empty_interval_and_bad_order():
    assert log_quad(lambda x: x, 1.0, 1.0)[0] == -np.inf
    with pytest.raises(ValueError):
        log_quad(lambda x: x, 1.0, 0.0)


def test_cumulative_matches_independent_quads():
    f = lambda x: np.sin(x) + 0.1 * x * x  # noqa: E731  (log of a positive integrand)
    pts = np.array([2.0, 0.5, 1.0, 0.5, 3.0])
    cum = log_cumulative(f, 0.0, pts)
    direct = log_quad(f, np.zeros_like(pts), pts)
    np.testing.assert_allclose(cum, direct, rtol=1e-14)


def test_integrable_singularity_resolves():
    # sqrt(x): the piece touching 0 keeps a fixed relative error, so it is
    # only accepted once it is negligible against the whole integral
    v = log_quad(lambda x: 0.5 * np.log(x), 0.0, 1.0, tol=1e-10)[0]
    assert math.exp(v) == pytest.approx(2.0 / 3.0, rel=1e-9)


def test_non_convergence_is_reported():
    with pytest.raises(ConvergenceError):
        log_quad(lambda x: np.log(np.abs(np.sin(1 / x)) + 1e-300), 1e-6, 1.0, max_level=3)
