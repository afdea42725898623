"""Independent reference computations shared by the tests.

Nothing here imports the package: these are the yardsticks.
"""

import math

import mpmath as mp


def adaptive_simpson(f, a, b, tol=1e-12, depth=50):
    """Plain recursive adaptive Simpson with Richardson correction."""

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6 * (fa + 4 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth <= 0 or abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15
        return rec(a, m, fa, flm, fm, left, tol / 2, depth - 1) + rec(
            m, b, fm, frm, fb, right, tol / 2, depth - 1
        )

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, depth)


def mp_theta(upsilon, rho_prime, delta, dps=30):
    with mp.workdps(dps):
        rp = mp.mpf(rho_prime)
        f = lambda s: mp.exp(-rp * s) * (1 - s / rp) ** (-(delta + 1))  # noqa: E731
        return mp.quad(f, [0, mp.mpf(upsilon)])


def mp_weight_r(y, rho_prime, delta, dps=30):
    with mp.workdps(dps):
        y, rp = mp.mpf(y), mp.mpf(rho_prime)
        return mp.exp(2 * rp * y) * (1 - y / rp) ** (2 * delta)


def mp_kernel_N(y, y1, rho_prime, mu, lam, dps=30):
    """(1/(lambda y1)) e^{rho' y1} (1 - y1/rho')^delta Theta(min(y, y1))."""
    delta = rho_prime * (mu / lam + rho_prime) - 1
    with mp.workdps(dps):
        th = mp_theta(min(y, y1), rho_prime, delta, dps)
        rp = mp.mpf(rho_prime)
        return mp.exp(rp * y1) * (1 - mp.mpf(y1) / rp) ** delta * th / (lam * mp.mpf(y1))


def mp_kernel_limit(y, s, mu, lam, dps=30):
    rho = mp.mpf(mu) / lam
    with mp.workdps(dps):
        inner = mp.quad(lambda u: mp.exp(u * u / 2 + rho * u), [0, min(y, s)])
        return mp.exp(-mp.mpf(s) ** 2 / 2 - rho * s) * inner / (lam * mp.mpf(s))


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


__all__ = ["adaptive_simpson", "mp_theta", "mp_weight_r", "mp_kernel_N", "mp_kernel_limit", "rel", "math"]
