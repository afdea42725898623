import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gribov_spectra import derive_params
from gribov_spectra.errors import ParameterError
from gribov_spectra.params import FrameTag, KernelFrame


@pytest.mark.parametrize(
    "args, expected",
    [((1, 2, 1), (1, 2, 2)), ((1, 1, 1), (1, 1, 1)), ((0.25, 1, 1), (4, 1, 19))],
)
def test_derived_values(args, expected):
    p = derive_params(*args)
    assert (p.rho_prime, p.rho, p.delta) == expected


def test_limit_params_have_no_rho_prime():
    p = derive_params(0, 1, 1)
    assert p.is_limit and p.rho_prime is None and p.delta is None
    with pytest.raises(ParameterError):
        p.require_native()


@pytest.mark.parametrize("args", [(1, 1, 0), (1, 1, -2), (-1, 1, 1), (1, math.nan, 1), (1, 1, math.inf)])
def test_rejects_bad_couplings(args):
    with pytest.raises(ParameterError):
        derive_params(*args)


def test_out_of_theory_needs_override():
    with pytest.raises(ParameterError, match="out of theory"):
        derive_params(1, -0.5, 1)
    with pytest.raises(ParameterError, match="delta"):
        derive_params(2, 0.1, 1)  # rho' = 0.5, delta = 0.5 * 0.6 - 1 < 0
    p = derive_params(2, 0.1, 1, allow_out_of_theory=True)
    assert p.out_of_theory and p.as_dict()["out_of_theory"]


@given(
    lp=st.floats(0.01, 10),
    mu=st.floats(0.01, 10),
    lam=st.floats(0.01, 10),
)
def test_definitions_hold_exactly(lp, mu, lam):
    p = derive_params(lp, mu, lam, allow_out_of_theory=True)
    assert p.rho_prime == lam / lp
    assert p.rho == mu / lam
    assert p.delta == p.rho_prime * (p.rho + p.rho_prime) - 1
    assert p.out_of_theory == (p.delta < 0)


def test_frames():
    assert KernelFrame.parse("Native").tag is FrameTag.NATIVE
    assert KernelFrame.parse(FrameTag.LIMIT).weight == "r_inf"
    with pytest.raises(ParameterError):
        KernelFrame.parse("bogus")
    with pytest.raises(ParameterError):
        KernelFrame.parse("native").check(derive_params(0, 1, 1))
