# vibromirror/core/units.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

"""
Internal unit system and conversions for concrete atoms.

Every quantity inside the library is expressed with hbar = M = kappa = 1:
lengths in 1/kappa, momenta in hbar*kappa, energies in hbar^2 kappa^2 / M,
times in M / (hbar kappa^2). Only this module knows about SI values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field
from scipy import constants
from typing_extensions import Annotated

from vibromirror.core.errors import DomainError

CESIUM_MASS_U = 132.905451961
CESIUM_WAVELENGTH_M = 852e-9
STANDARD_GRAVITY = 9.81


class PhysicalAtom(BaseModel):
    """
    An atom bouncing on an evanescent wave with decay constant kappa.

    Gravity is only used for free-flight conversions (bounce height, arm separation).
    """

    model_config = ConfigDict(frozen=True)

    mass: Annotated[float, Field(gt=0.0, description="Atomic mass in kg")]
    kappa: Annotated[float, Field(gt=0.0, description="Evanescent decay constant in 1/m")]
    gravity: Annotated[float, Field(ge=0.0, description="Local gravity in m/s^2")] = STANDARD_GRAVITY

    @classmethod
    def cesium(cls, gravity: float = STANDARD_GRAVITY) -> "PhysicalAtom":
        """Cesium on a mirror made from 852 nm light."""
        return cls(
            mass=CESIUM_MASS_U * constants.atomic_mass,
            kappa=2.0 * math.pi / CESIUM_WAVELENGTH_M,
            gravity=gravity,
        )


@dataclass(frozen=True)
class UnitSystem:
    """
    SI values of the internal units (hbar = M = kappa = 1) for one atom.
    """

    atom: PhysicalAtom

    @property
    def momentum(self) -> float:
        """hbar*kappa in kg m/s."""
        return constants.hbar * self.atom.kappa

    @property
    def length(self) -> float:
        return 1.0 / self.atom.kappa

    @property
    def energy(self) -> float:
        return constants.hbar**2 * self.atom.kappa**2 / self.atom.mass

    @property
    def time(self) -> float:
        return self.atom.mass / (constants.hbar * self.atom.kappa**2)

    @property
    def frequency(self) -> float:
        return 1.0 / self.time

    @property
    def velocity(self) -> float:
        return self.momentum / self.atom.mass


def effective_mirror_position(P_i: float, V0: float) -> float:
    """
    Position of the ideal hard mirror that reproduces the far-field phase of the
    exponential potential: xi_eff = 1/2 ln(V0 / 4E_i).

    :param P_i: Incident momentum (scaled).
    :param V0: Potential amplitude at the surface (scaled).
    :return: xi_eff in units of 1/kappa.
    """
    if P_i <= 0.0 or V0 <= 0.0:
        raise DomainError(f"effective mirror position needs P_i > 0 and V0 > 0, got P_i={P_i}, V0={V0}")
    E_i = 0.5 * P_i * P_i
    return 0.5 * math.log(V0 / (4.0 * E_i))


@dataclass(frozen=True)
class ScaledState:
    """
    Dimensionless kinematics of one incident atom.

    tau equals 1/P_i and q equals Q identically; both are stored for readability
    and checked on construction.
    """

    P_i: float
    Q: float
    tau: float
    q: float
    xi_eff: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.P_i > 0.0:
            raise DomainError(f"P_i must be positive, got {self.P_i}")
        if self.Q < 0.0:
            raise DomainError(f"Q must be non-negative, got {self.Q}")
        if not math.isclose(self.tau * self.P_i, 1.0, rel_tol=1e-12):
            raise DomainError(f"tau must equal 1/P_i, got tau={self.tau} for P_i={self.P_i}")
        if not math.isclose(self.q, self.Q, rel_tol=1e-12, abs_tol=1e-300):
            raise DomainError(f"q must equal Q in scaled units, got q={self.q}, Q={self.Q}")

    @classmethod
    def from_scaled(cls, P_i: float, Q: float, V0: Optional[float] = None) -> "ScaledState":
        """
        Build a state directly from scaled momentum and frequency.

        :param P_i: Incident momentum in units of hbar*kappa.
        :param Q: Modulation frequency times interaction time.
        :param V0: Optional potential amplitude; fixes xi_eff when given.
        """
        state = cls(P_i=P_i, Q=Q, tau=1.0 / P_i, q=Q)
        return state.with_mirror(V0) if V0 is not None else state

    @property
    def E_i(self) -> float:
        return 0.5 * self.P_i * self.P_i

    @property
    def omega(self) -> float:
        """Scaled angular frequency, Q / tau."""
        return self.Q / self.tau

    def with_mirror(self, V0: float) -> "ScaledState":
        """Return a copy carrying xi_eff for a potential of amplitude V0."""
        return replace(self, xi_eff=effective_mirror_position(self.P_i, V0))


def scale_incident(p_physical: float, atom: PhysicalAtom, omega: float) -> ScaledState:
    """
    Convert an incident momentum and a modulation frequency to scaled kinematics.

    :param p_physical: Incident momentum in kg m/s.
    :param atom: The atom and mirror decay constant.
    :param omega: Modulation angular frequency in rad/s.
    :return: ScaledState with xi_eff unset.
    :raises DomainError: For non-positive momentum or negative frequency.
    """
    if not p_physical > 0.0:
        raise DomainError(f"incident momentum must be positive, got {p_physical}")
    if omega < 0.0:
        raise DomainError(f"modulation frequency must be non-negative, got {omega}")
    units = UnitSystem(atom)
    P_i = p_physical / units.momentum
    tau_si = atom.mass / (atom.kappa * p_physical)
    Q = omega * tau_si
    q = constants.hbar * omega * atom.mass / p_physical / units.momentum
    return ScaledState(P_i=P_i, Q=Q, tau=tau_si / units.time, q=q)


def unscale(state: ScaledState, atom: PhysicalAtom) -> Tuple[float, float]:
    """
    Inverse of scale_incident.

    :return: (momentum in kg m/s, angular frequency in rad/s)
    """
    units = UnitSystem(atom)
    p_physical = state.P_i * units.momentum
    tau_si = atom.mass / (atom.kappa * p_physical)
    return p_physical, state.Q / tau_si


def velocity(p_physical: float, atom: PhysicalAtom) -> float:
    """Velocity in m/s for a momentum in kg m/s."""
    return p_physical / atom.mass


def omega_for_transfer(P_i: float, Q: float, atom: PhysicalAtom) -> float:
    """
    Modulation angular frequency (rad/s) that produces a momentum step of Q hbar*kappa
    for an atom incident with P_i hbar*kappa.
    """
    units = UnitSystem(atom)
    return Q * P_i * units.frequency


def bounce_height(p_physical: float, atom: PhysicalAtom) -> float:
    """
    Height reached in free flight after a bounce with momentum p_physical.

    :param p_physical: Momentum at the mirror in kg m/s (zero allowed).
    :param atom: Atom whose gravity field is used.
    :return: v^2 / 2g in metres.
    :raises DomainError: For zero gravity or negative momentum.
    """
    if atom.gravity <= 0.0:
        raise DomainError("bounce height is undefined without gravity")
    if p_physical < 0.0:
        raise DomainError(f"momentum must be non-negative, got {p_physical}")
    v = velocity(p_physical, atom)
    return v * v / (2.0 * atom.gravity)


def arm_separation(p_physical: float, q_physical: float, atom: PhysicalAtom) -> Tuple[float, float]:
    """
    Free-flight separation of two arms that leave the mirror with momenta p and p + q.

    :return: (apex height difference in m, return time difference in s)
    """
    if atom.gravity <= 0.0:
        raise DomainError("arm separation is undefined without gravity")
    v = velocity(p_physical, atom)
    dv = velocity(q_physical, atom)
    return v * dv / atom.gravity, 2.0 * dv / atom.gravity
