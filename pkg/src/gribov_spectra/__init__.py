"""Inverse of the Gribov operator on the imaginary axis and its Perron spectrum.

The smallest nonzero eigenvalue ``sigma`` of the Gribov Hamiltonian is
computed as ``1 / Omega`` where ``Omega`` is the spectral radius of an
explicit integral-kernel inverse, discretised by a Nystrom-type scheme.
"""

__version__ = "0.1.0"

from .discretize import (
    OperatorMatrix,
    QuadratureRule,
    apply_plain,
    assemble,
    composite_rule,
    frame_rule,
    gauss_rule,
    truncation_bound,
)
from .errors import ConvergenceError, DomainError, GribovError, NumericalError, ParameterError
from .kernels import (
    kernel_limit,
    kernel_N,
    kernel_N_tilde,
    kernel_T,
    theta,
    weight_r,
    weight_r_inf,
)
from .params import LIMIT, NATIVE, PLAIN, FrameTag, GribovParams, KernelFrame, derive_params
from .spectral import (
    SpectralResult,
    hs_norm,
    ode_residual,
    power_iteration,
    smallest_eigenvalue,
    subdominant_gap,
)
from .studies import (
    StudyKind,
    StudyReport,
    analyticity_probe,
    hs_limit_study,
    kernel_limit_study,
    lambda_prime_limit,
    sweep_mu,
)
