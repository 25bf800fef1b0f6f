# vibromirror/core/born.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

"""
First-order (golden rule) transition probabilities between eigenstates of the
static exponential mirror, driven by the modulated part of the potential.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

from vibromirror.core.errors import ClosedChannelError, DomainError
from vibromirror.core.semiclassical import bessel_j, beta, modulation_index

logger = logging.getLogger(__name__)

PERTURBATIVE_LIMIT = 0.1
_LOG_2_OVER_PI = math.log(2.0 / math.pi)


def log_sinh(x: float) -> float:
    """
    ln|sinh(x)|, accurate for tiny and for very large arguments.
    """
    x = abs(x)
    if x == 0.0:
        return -math.inf
    if x < 1e-2:
        x2 = x * x
        return math.log(x) + math.log1p(x2 / 6.0 + x2 * x2 / 120.0 + x2 * x2 * x2 / 5040.0)
    if x > 20.0:
        return x - math.log(2.0) + math.log1p(-math.exp(-2.0 * x))
    return math.log(math.sinh(x))


def _log_ratio(d: float) -> float:
    """ln(|d| / sinh(pi |d| / 2)), continuous through d = 0 where it equals ln(2/pi)."""
    d = abs(d)
    if d == 0.0:
        return _LOG_2_OVER_PI
    return math.log(d) - log_sinh(0.5 * math.pi * d)


def born_probability(P_i: float, P_f: float, epsilon: float) -> float:
    """
    Transition probability from momentum P_i to P_f for modulation depth epsilon:

        (eps^2 pi^2 / 64) sinh(pi P_i) sinh(pi P_f)
            * [(P_i + P_f)(P_i - P_f) / (sinh(pi (P_i + P_f)/2) sinh(pi (P_i - P_f)/2))]^2

    Evaluated in log space; P_f = P_i uses the analytic limit.

    :raises DomainError: For non-positive momenta or epsilon outside [0, 1].
    """
    if not (P_i > 0.0 and P_f > 0.0):
        raise DomainError(f"momenta must be positive, got P_i={P_i}, P_f={P_f}")
    if not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"epsilon must lie in [0, 1], got {epsilon}")
    if epsilon == 0.0:
        return 0.0
    total = P_i + P_f
    log_w = (
        2.0 * math.log(epsilon * math.pi / 8.0)
        + log_sinh(math.pi * P_i)
        + log_sinh(math.pi * P_f)
        + 2.0 * (math.log(total) - log_sinh(0.5 * math.pi * total))
        + 2.0 * _log_ratio(P_i - P_f)
    )
    return math.exp(log_w)


def sideband_momenta_exact(P_i: float, Q: float, n: int) -> float:
    """
    Final momentum of sideband n from energy conservation, sqrt(P_i^2 + 2 n P_i Q).

    :raises ClosedChannelError: When the final kinetic energy would be negative.
    """
    discriminant = P_i * P_i + 2.0 * n * P_i * Q
    if discriminant < 0.0:
        raise ClosedChannelError(f"sideband n={n} is closed for P_i={P_i}, Q={Q}")
    return math.sqrt(discriminant)


@dataclass(frozen=True)
class AsymmetryRatio:
    approx: float
    exact: float


def asymmetry_ratio(P_i: float, Q: float) -> AsymmetryRatio:
    """
    Ratio W+/W- of the upper and lower first sidebands, both as exp(pi Q^2 / P_i)
    and from the full transition probability.

    :raises ClosedChannelError: When the lower sideband is closed (2Q >= P_i).
    """
    if not P_i > 0.0 or Q < 0.0:
        raise DomainError(f"asymmetry ratio needs P_i > 0 and Q >= 0, got {P_i}, {Q}")
    if 2.0 * Q >= P_i:
        raise ClosedChannelError(f"lower sideband closed for P_i={P_i}, Q={Q}")
    upper = born_probability(P_i, sideband_momenta_exact(P_i, Q, 1), 1.0)
    lower = born_probability(P_i, sideband_momenta_exact(P_i, Q, -1), 1.0)
    return AsymmetryRatio(approx=math.exp(math.pi * Q * Q / P_i), exact=upper / lower)


@dataclass(frozen=True)
class BornResult:
    """
    First sidebands of a Born calculation. Flux-normalised values carry the
    extra factor p_i / p_f.
    """

    P_i: float
    Q: float
    epsilon: float
    P_plus: float
    P_minus: float
    W_plus: float
    W_minus: float

    @property
    def W_plus_flux(self) -> float:
        return self.W_plus * self.P_i / self.P_plus

    @property
    def W_minus_flux(self) -> float:
        return self.W_minus * self.P_i / self.P_minus

    @property
    def perturbative(self) -> bool:
        return max(self.W_plus, self.W_minus) <= PERTURBATIVE_LIMIT


def born_sidebands(P_i: float, Q: float, epsilon: float) -> BornResult:
    P_plus = sideband_momenta_exact(P_i, Q, 1)
    P_minus = sideband_momenta_exact(P_i, Q, -1)
    if P_minus == 0.0:
        raise ClosedChannelError(f"lower sideband sits at threshold for P_i={P_i}, Q={Q}")
    result = BornResult(
        P_i=P_i,
        Q=Q,
        epsilon=epsilon,
        P_plus=P_plus,
        P_minus=P_minus,
        W_plus=born_probability(P_i, P_plus, epsilon),
        W_minus=born_probability(P_i, P_minus, epsilon),
    )
    if not result.perturbative:
        logger.warning(
            f"Born probabilities exceed {PERTURBATIVE_LIMIT} at P_i={P_i}, Q={Q}, eps={epsilon}: "
            f"W+={result.W_plus:.3g}, W-={result.W_minus:.3g}"
        )
    return result


def semiclassical_limit(P_i: float, P_f: float, epsilon: float, midpoint: bool = True) -> float:
    """
    Large-momentum form (eps^2 / 4) P^2 beta^2(P_f - P_i), with P the mean of the
    two momenta (midpoint) or P_i.
    """
    P = 0.5 * (P_i + P_f) if midpoint else P_i
    return 0.25 * epsilon * epsilon * P * P * beta(P_f - P_i) ** 2


def quantum_limit(P_i: float, P_f: float, epsilon: float) -> float:
    """Small-momentum form (eps^2 / 4) P_i P_f."""
    return 0.25 * epsilon * epsilon * P_i * P_f


@dataclass(frozen=True)
class BornAgreement:
    """First-sideband weight of the phase-modulation model next to the Born sidebands."""

    semiclassical: float
    born_plus_flux: float
    born_minus_flux: float

    @property
    def upper_ratio(self) -> float:
        return self.semiclassical / self.born_plus_flux

    @property
    def geometric_ratio(self) -> float:
        return self.semiclassical / math.sqrt(self.born_plus_flux * self.born_minus_flux)


def born_agreement(P_i: float, Q: float, epsilon: float) -> BornAgreement:
    born = born_sidebands(P_i, Q, epsilon)
    u = modulation_index(P_i, Q, epsilon)
    return BornAgreement(
        semiclassical=bessel_j(1, u) ** 2,
        born_plus_flux=born.W_plus_flux,
        born_minus_flux=born.W_minus_flux,
    )
