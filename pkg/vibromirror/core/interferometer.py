# vibromirror/core/interferometer.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

"""
Three-bounce interferometer on a vibrating mirror.

Two paths reach each output channel: (0, +1, -1) and (+1, -1, 0) sideband
orders to the E_i channel, (0, +1, 0) and (+1, -1, +1) to the E_i + hbar omega
channel.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import optimize

from vibromirror.core.errors import MissingSidebandError
from vibromirror.core.semiclassical import (
    SidebandSpectrum,
    bessel_j,
    bessel_j_orders,
    default_order_count,
    find_root,
    modulation_index,
)
from vibromirror.runtime.concurrency import map_ordered

if TYPE_CHECKING:
    from vibromirror.runtime.tdse import BounceSetup

logger = logging.getLogger(__name__)

SEARCH_INTERVAL = (0.0, 3.0)
PLAN_TOLERANCE = 0.10

Triplet = Tuple[float, float, float]


class InterferometerPlan(BaseModel):
    """
    Modulation indices and mirror phases for the three bounces, plus the
    free-flight action phases of the four arms.
    """

    model_config = ConfigDict(frozen=True)

    u: Triplet
    phi: Triplet = (0.0, 0.0, 0.0)
    epsilon: Optional[Triplet] = None
    alpha_AB: float = 0.0
    alpha_BC: float = 0.0
    alpha_AD: float = 0.0
    alpha_DC: float = 0.0
    symmetric: bool = True

    @model_validator(mode="after")
    def _check_symmetry(self) -> "InterferometerPlan":
        if self.symmetric and not (
            math.isclose(self.alpha_AB, self.alpha_DC, abs_tol=1e-12)
            and math.isclose(self.alpha_AD, self.alpha_BC, abs_tol=1e-12)
        ):
            raise ValueError("symmetric plan needs alpha_AB == alpha_DC and alpha_AD == alpha_BC")
        return self

    @property
    def theta(self) -> float:
        """Interferometric phase phi_1 - 2 phi_2 + phi_3."""
        return self.phi[0] - 2.0 * self.phi[1] + self.phi[2]

    def with_phases(self, phi: Triplet) -> "InterferometerPlan":
        return self.model_copy(update={"phi": tuple(phi)})

    def with_theta(self, theta: float) -> "InterferometerPlan":
        """Copy with phi = (theta, 0, 0)."""
        return self.with_phases((theta, 0.0, 0.0))


@dataclass(frozen=True)
class ChannelAmplitudes:
    A_Ei: complex
    A_Ei_plus: complex
    fringe: float

    @property
    def P_Ei(self) -> float:
        return abs(self.A_Ei) ** 2

    @property
    def P_Ei_plus(self) -> float:
        return abs(self.A_Ei_plus) ** 2

    @property
    def total(self) -> float:
        return self.P_Ei + self.P_Ei_plus


def _phase_free(spectrum: SidebandSpectrum) -> SidebandSpectrum:
    return spectrum.with_phase(-spectrum.phi) if spectrum.phi else spectrum


def fringe_term(first: Mapping[int, complex], second: Mapping[int, complex], third: Mapping[int, complex]) -> complex:
    """(a_0 a_1*)^(1) (a_1 a_-1*)^(2) (a_-1 a_0*)^(3)."""
    return (
        first[0]
        * np.conj(first[1])
        * second[1]
        * np.conj(second[-1])
        * third[-1]
        * np.conj(third[0])
    )


def channel_amplitudes(plan: InterferometerPlan, spectra: Sequence[SidebandSpectrum]) -> ChannelAmplitudes:
    """
    Amplitudes of the two output channels.

    The modulation phase carried by each spectrum is removed; the plan's phases
    phi_m enter explicitly.
    """
    a = [
        {n: _phase_free(s).amplitude(n) for n in (-1, 0, 1)}
        for s in spectra
    ]
    phi1, phi2, phi3 = plan.phi
    upper_arm = np.exp(1j * (plan.alpha_AB + plan.alpha_BC))
    lower_arm = np.exp(1j * (plan.alpha_AD + plan.alpha_DC))
    A_Ei = (
        a[0][0] * a[1][1] * a[2][-1] * np.exp(1j * (phi2 - phi3)) * upper_arm
        + a[0][1] * a[1][-1] * a[2][0] * np.exp(1j * (phi1 - phi2)) * lower_arm
    )
    A_Ei_plus = (
        a[0][0] * a[1][1] * a[2][0] * np.exp(1j * phi2) * upper_arm
        + a[0][1] * a[1][-1] * a[2][1] * np.exp(1j * (phi1 - phi2 + phi3)) * lower_arm
    )
    fringe = 2.0 * float(np.real(fringe_term(*a) * np.exp(1j * plan.theta)))
    return ChannelAmplitudes(A_Ei=complex(A_Ei), A_Ei_plus=complex(A_Ei_plus), fringe=fringe)


def fringe_amplitude(u1: float, u2: float, u3: float, theta: float) -> float:
    """F = 2 (J0(u1) J1(u1)) J1(u2)^2 (J0(u3) J1(u3)) cos(theta)."""
    return (
        2.0
        * bessel_j(0, u1)
        * bessel_j(1, u1)
        * bessel_j(1, u2) ** 2
        * bessel_j(0, u3)
        * bessel_j(1, u3)
        * math.cos(theta)
    )


def _maximize(f: Callable[[float], float], interval: Tuple[float, float], points: int) -> float:
    """Coarse grid over the open interval, then golden-section refinement around the best point."""
    lo, hi = interval
    grid = np.linspace(lo, hi, points + 2)[1:-1]
    values = np.array([f(x) for x in grid])
    k = int(np.argmax(values))
    if k == 0 or k == grid.size - 1:
        return float(grid[k])
    result = optimize.minimize_scalar(
        lambda x: -f(x), bracket=(grid[k - 1], grid[k], grid[k + 1]), method="golden", tol=1e-10
    )
    return float(result.x)


@dataclass(frozen=True)
class FringeOptimum:
    u1: float
    u2: float
    u3: float
    F_max: float


def optimize_fringe(constrained: bool = False, points: int = 61) -> FringeOptimum:
    """
    Maximise |F| over u1, u2, u3 in (0, 3).

    The objective factorises, so u2 maximises J1^2 and u1 = u3 maximise |J0 J1|.
    With constrained=True all three indices are equal and 2 (J0 J1)^2 J1^2 is
    maximised over the common index.
    """
    if constrained:
        u = _maximize(lambda x: abs(fringe_amplitude(x, x, x, 0.0)), SEARCH_INTERVAL, points)
        return FringeOptimum(u1=u, u2=u, u3=u, F_max=abs(fringe_amplitude(u, u, u, 0.0)))
    u2 = _maximize(lambda x: bessel_j(1, x) ** 2, SEARCH_INTERVAL, points)
    u1 = _maximize(lambda x: abs(bessel_j(0, x) * bessel_j(1, x)), SEARCH_INTERVAL, points)
    return FringeOptimum(u1=u1, u2=u2, u3=u1, F_max=abs(fringe_amplitude(u1, u2, u1, 0.0)))


def plan_from_physics(
    P_i: float,
    Q: float,
    eps: Triplet,
    phi: Triplet = (0.0, 0.0, 0.0),
    targets: Optional[FringeOptimum] = None,
) -> InterferometerPlan:
    """
    Plan whose indices follow u_m = eps_m P_i beta(Q).

    Indices more than 10 % away from the optimum are logged.
    """
    u = tuple(modulation_index(P_i, Q, e) for e in eps)
    targets = targets or optimize_fringe()
    for m, (value, target) in enumerate(zip(u, (targets.u1, targets.u2, targets.u3)), start=1):
        if abs(value - target) > PLAN_TOLERANCE * target:
            logger.warning(f"Bounce {m}: index u={value:.3f} is more than 10% from the optimum {target:.3f}")
    return InterferometerPlan(u=u, phi=tuple(phi), epsilon=tuple(eps))


def semiclassical_spectra(plan: InterferometerPlan, P_i: float, Q: float, xi_eff: float = 0.0) -> List[SidebandSpectrum]:
    """Phase-free sideband spectra for the plan's three indices."""
    spectra = []
    for u in plan.u:
        n_max = default_order_count(u)
        orders = np.arange(-n_max, n_max + 1)
        spectra.append(
            SidebandSpectrum(
                orders=orders,
                amplitudes=bessel_j_orders(n_max, u) * np.exp(-1j * orders * Q * xi_eff),
                carrier=P_i,
                spacing=Q,
                u=u,
                xi_eff=xi_eff,
            )
        )
    return spectra


def fringe_curve(
    plan: InterferometerPlan, spectra: Sequence[SidebandSpectrum], thetas: Sequence[float]
) -> Dict[str, np.ndarray]:
    """Channel probabilities and fringe amplitude as theta is scanned through phi_1."""
    rows = [channel_amplitudes(plan.with_theta(theta), spectra) for theta in thetas]
    return {
        "theta": np.asarray(thetas, dtype=float),
        "P_Ei": np.array([r.P_Ei for r in rows]),
        "P_Ei_plus": np.array([r.P_Ei_plus for r in rows]),
        "fringe": np.array([r.fringe for r in rows]),
    }


def _require_orders(triplets: Sequence[Mapping[int, complex]]) -> None:
    for m, amplitudes in enumerate(triplets, start=1):
        missing = [n for n in (-1, 0, 1) if n not in amplitudes or amplitudes[n] is None]
        if missing:
            raise MissingSidebandError(f"Bounce {m} lacks sideband amplitudes for orders {missing}")


def fringe_from_tdse(triplets: Sequence[Mapping[int, complex]], theta: float = 0.0) -> float:
    """
    F = 2 Re[(a_0 a_1*)^(1) (a_1 a_-1*)^(2) (a_-1 a_0*)^(3) e^{i theta}] with measured amplitudes.

    :raises MissingSidebandError: If any bounce lacks one of the orders -1, 0, 1.
    """
    _require_orders(triplets)
    return 2.0 * float(np.real(fringe_term(*triplets) * np.exp(1j * theta)))


def max_fringe(triplets: Sequence[Mapping[int, complex]]) -> float:
    """Largest |F| over theta, 2 |(a_0 a_1*)^(1) (a_1 a_-1*)^(2) (a_-1 a_0*)^(3)|."""
    _require_orders(triplets)
    return 2.0 * abs(fringe_term(*triplets))


def _bounce_amplitudes(setup: "BounceSetup") -> Dict[int, complex]:
    from vibromirror.runtime.tdse import run_bounce

    return run_bounce(setup).amplitudes((-1, 0, 1))


def tdse_bounce_amplitudes(
    P_i: float,
    Q: float,
    depths: Triplet,
    jobs: Optional[int] = None,
    base: Optional["BounceSetup"] = None,
) -> List[Dict[int, complex]]:
    """
    Sideband amplitudes (orders -1, 0, 1) measured by wavepacket runs at each bounce depth.

    Equal depths are simulated once; distinct runs go to a worker pool.
    """
    from vibromirror.runtime.tdse import BounceSetup

    base = base or BounceSetup()
    distinct = sorted(set(depths))
    setups = [base.model_copy(update={"P_i": P_i, "Q": Q, "epsilon": e, "orders": (-1, 0, 1)}) for e in distinct]
    results = dict(zip(distinct, map_ordered(_bounce_amplitudes, setups, jobs)))
    return [results[e] for e in depths]


def intensity_noise_phase(P_i: float, epsilon: float) -> float:
    """Phase shift eps p / (hbar kappa) from a relative intensity change eps, which moves xi_eff by eps/2."""
    return epsilon * P_i


def contrast_index() -> float:
    """Index where |a_0| = |a_1|, i.e. J0(u) = J1(u); close to 1.435."""
    return find_root(lambda u: bessel_j(0, u) - bessel_j(1, u), 1.0, 2.0)


def contrast_plan(u2: Optional[float] = None) -> InterferometerPlan:
    """Full-contrast plan: equal |a_0| and |a_1| at the first and third bounces."""
    u = contrast_index()
    u2 = u2 if u2 is not None else optimize_fringe().u2
    return InterferometerPlan(u=(u, u2, u))
