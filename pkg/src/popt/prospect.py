"""Prospect-theory primitives: value function, probability weighting, prospect value."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError

BOUNDARY_TOL = 1e-12


@dataclass(frozen=True)
class ProspectParams:
    """Behavioural coefficients of one agent.

    ``alpha``/``beta`` bend the gain/loss branches, ``lam`` scales losses and
    ``phi`` controls how strongly probabilities are distorted.
    """

    alpha: float = 0.88
    beta: float = 0.88
    lam: float = 2.25
    phi: float = 0.74

    def __post_init__(self):
        for name in ("alpha", "beta", "lam", "phi"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not 0.0 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0, 1), got {self.alpha}")
        if not 0.0 < self.beta < 1.0:
            raise DomainError(f"beta must lie in (0, 1), got {self.beta}")
        if self.lam < 0.0:
            raise DomainError(f"lambda must be non-negative, got {self.lam}")
        if self.lam <= 1.0:
            warnings.warn(
                f"lambda={self.lam} <= 1: agent is not loss averse", stacklevel=3
            )
        if not 0.0 < self.phi <= 1.0:
            raise DomainError(f"phi must lie in (0, 1], got {self.phi}")

    def with_lambda(self, lam: float) -> "ProspectParams":
        return ProspectParams(self.alpha, self.beta, lam, self.phi)


DEFAULT_PARAMS = ProspectParams()


@dataclass(frozen=True)
class Outcome:
    value: float
    probability: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DomainError("outcome value must be finite")
        if not 0.0 <= self.probability <= 1.0:
            raise DomainError(f"probability {self.probability} outside [0, 1]")


def value_fn(x: float, x0: float, params: ProspectParams = DEFAULT_PARAMS) -> float:
    """S-shaped value of payoff ``x`` relative to the reference ``x0``."""
    if not (math.isfinite(x) and math.isfinite(x0)):
        raise DomainError("value_fn requires finite payoffs")
    diff = x - x0
    if diff >= -BOUNDARY_TOL:
        return max(diff, 0.0) ** params.alpha
    return -params.lam * (-diff) ** params.beta


def weight_fn(rho: float, phi: float = DEFAULT_PARAMS.phi) -> float:
    """Probability weighting ``exp(-(-ln rho)^phi)`` with pi(0)=0 and pi(1)=1."""
    if not math.isfinite(rho) or not 0.0 <= rho <= 1.0:
        raise DomainError(f"probability {rho} outside [0, 1]")
    if not phi > 0.0 or not math.isfinite(phi):
        raise DomainError(f"phi must be positive, got {phi}")
    if rho == 0.0:
        return 0.0
    if rho == 1.0:
        return 1.0
    return math.exp(-((-math.log(rho)) ** phi))


def prospect_value(
    option: Sequence[Outcome], x0: float, params: ProspectParams = DEFAULT_PARAMS
) -> float:
    if len(option) == 0:
        raise DomainError("an option needs at least one outcome")
    return math.fsum(
        value_fn(o.value, x0, params) * weight_fn(o.probability, params.phi)
        for o in option
    )
