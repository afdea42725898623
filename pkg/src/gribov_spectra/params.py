"""Couplings of the Gribov operator and the frames a kernel can act in."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .errors import ParameterError


@dataclass(frozen=True)
class GribovParams:
    """Physical couplings plus the derived quantities used by every kernel.

    ``rho_prime`` and ``delta`` are ``None`` when ``lambda_prime == 0``; only
    limit-frame operations accept such parameters.
    """

    lambda_prime: float
    mu: float
    lam: float
    rho_prime: float | None = field(init=False)
    rho: float = field(init=False)
    delta: float | None = field(init=False)
    out_of_theory: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "rho", self.mu / self.lam)
        if self.lambda_prime > 0:
            rp = self.lam / self.lambda_prime
            object.__setattr__(self, "rho_prime", rp)
            object.__setattr__(self, "delta", rp * (self.rho + rp) - 1.0)
        else:
            object.__setattr__(self, "rho_prime", None)
            object.__setattr__(self, "delta", None)

    @property
    def is_limit(self) -> bool:
        return self.lambda_prime == 0

    def require_native(self) -> None:
        if self.is_limit:
            raise ParameterError("operation needs lambda_prime > 0")

    def as_dict(self) -> dict:
        return {
            "lambda_prime": self.lambda_prime,
            "mu": self.mu,
            "lambda": self.lam,
            "rho_prime": self.rho_prime,
            "rho": self.rho,
            "delta": self.delta,
            "out_of_theory": self.out_of_theory,
        }


def derive_params(
    lambda_prime: float, mu: float, lam: float, *, allow_out_of_theory: bool = False
) -> GribovParams:
    """Validate the couplings and build :class:`GribovParams`.

    The weighted-space theory needs ``mu > 0`` and ``delta >= 0``.  Outside
    that region a :class:`ParameterError` is raised unless
    ``allow_out_of_theory`` is set, in which case the result is flagged.
    """
    for name, v in (("lambda_prime", lambda_prime), ("mu", mu), ("lambda", lam)):
        if not math.isfinite(v):
            raise ParameterError(f"{name} must be finite, got {v!r}")
    if lam <= 0:
        raise ParameterError(f"lambda must be > 0, got {lam}")
    if lambda_prime < 0:
        raise ParameterError(f"lambda_prime must be >= 0, got {lambda_prime}")

    p = GribovParams(float(lambda_prime), float(mu), float(lam))
    problems = []
    if mu <= 0:
        problems.append(f"mu = {mu} <= 0")
    if p.delta is not None and p.delta < 0:
        problems.append(f"delta = {p.delta} < 0")
    if problems:
        if not allow_out_of_theory:
            raise ParameterError("out of theory: " + ", ".join(problems))
        p = GribovParams(float(lambda_prime), float(mu), float(lam), out_of_theory=True)
    return p


class FrameTag(enum.Enum):
    NATIVE = "native"  # weight r on [0, rho']
    LIMIT = "limit"  # weight r_inf on [0, inf)
    PLAIN = "plain"  # unweighted kernel N


@dataclass(frozen=True)
class KernelFrame:
    tag: FrameTag

    @property
    def weight(self) -> str | None:
        return {FrameTag.NATIVE: "r", FrameTag.LIMIT: "r_inf", FrameTag.PLAIN: None}[self.tag]

    def check(self, p: GribovParams) -> None:
        if self.tag is FrameTag.NATIVE and p.is_limit:
            raise ParameterError("native weighted frame requires lambda_prime > 0")

    @classmethod
    def parse(cls, value: str | "KernelFrame" | FrameTag) -> "KernelFrame":
        if isinstance(value, KernelFrame):
            return value
        if isinstance(value, FrameTag):
            return cls(value)
        try:
            return cls(FrameTag(value.lower()))
        except ValueError:
            raise ParameterError(f"unknown frame {value!r}") from None


NATIVE = KernelFrame(FrameTag.NATIVE)
LIMIT = KernelFrame(FrameTag.LIMIT)
PLAIN = KernelFrame(FrameTag.PLAIN)
