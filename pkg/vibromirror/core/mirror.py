# vibromirror/core/mirror.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from typing_extensions import Annotated

from vibromirror.core.errors import DomainError, IntegrationError
from vibromirror.core.semiclassical import beta
from vibromirror.core.units import ScaledState
from vibromirror.runtime.integrators import rk4_step

logger = logging.getLogger(__name__)

DEFAULT_V0_FACTOR = math.exp(10.0)
DEFAULT_START_MARGIN = 8.0
DEFAULT_STEPS_PER_TAU = 200

ArrayLike = Union[float, np.ndarray]


class MirrorConfig(BaseModel):
    """
    Static and modulated parts of the evanescent-wave potential, in scaled units.

    V(z, t) = V0 exp(-2z) (1 + epsilon sin(omega t - phi)) for z >= 0.
    """

    model_config = ConfigDict(frozen=True)

    V0: Annotated[float, Field(gt=0.0)]
    epsilon: Annotated[float, Field(ge=0.0, le=1.0)] = 0.0
    omega: Annotated[float, Field(ge=0.0)] = 0.0
    phi: float = 0.0

    @classmethod
    def for_state(
        cls,
        state: ScaledState,
        epsilon: float,
        phi: float = 0.0,
        V0: Optional[float] = None,
    ) -> "MirrorConfig":
        """
        Mirror matched to an incident state: omega = Q / tau, V0 defaults to e^10 E_i.
        """
        return cls(
            V0=V0 if V0 is not None else DEFAULT_V0_FACTOR * state.E_i,
            epsilon=epsilon,
            omega=state.omega,
            phi=phi,
        )

    def envelope(self, t: ArrayLike) -> ArrayLike:
        """Modulation factor 1 + epsilon sin(omega t - phi)."""
        return 1.0 + self.epsilon * np.sin(self.omega * np.asarray(t) - self.phi)


def potential(z: ArrayLike, t: float, cfg: MirrorConfig) -> ArrayLike:
    """
    Light-shift potential seen by the atom. Zero on the dielectric side z < 0.

    :param z: Position(s), scaled.
    :param t: Time, scaled.
    :param cfg: Mirror configuration.
    """
    z_arr = np.asarray(z, dtype=float)
    value = np.where(z_arr >= 0.0, cfg.V0 * np.exp(-2.0 * np.maximum(z_arr, 0.0)) * cfg.envelope(t), 0.0)
    return float(value) if value.ndim == 0 else value


def equivalent_displacement(cfg: MirrorConfig, t: float) -> float:
    """
    Displacement z_m(t) = 1/2 ln(1 + epsilon sin(omega t - phi)) of the static
    potential that reproduces the modulated one.

    :raises DomainError: When the modulation switches the potential off completely.
    """
    s = cfg.epsilon * math.sin(cfg.omega * t - cfg.phi)
    if s <= -1.0:
        raise DomainError(f"equivalent displacement diverges at t={t} (epsilon={cfg.epsilon})")
    return 0.5 * math.log1p(s)


def _log_cosh(x: ArrayLike) -> ArrayLike:
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax)) - math.log(2.0)


@dataclass(frozen=True)
class ClassicalTrajectory:
    """
    Reflection of a classical particle in the unmodulated potential,
    z_c(t) = 1/2 ln[(V0/E_i) cosh^2((t - t0)/tau)].
    """

    t0: float
    E_i: float
    V0: float

    @property
    def P_i(self) -> float:
        return math.sqrt(2.0 * self.E_i)

    @property
    def tau(self) -> float:
        return 1.0 / self.P_i

    @property
    def turning_point(self) -> float:
        return 0.5 * math.log(self.V0 / self.E_i)

    @property
    def xi_eff(self) -> float:
        return 0.5 * math.log(self.V0 / (4.0 * self.E_i))

    def position(self, t: ArrayLike) -> ArrayLike:
        return self.turning_point + _log_cosh((np.asarray(t) - self.t0) / self.tau)

    def velocity(self, t: ArrayLike) -> ArrayLike:
        return self.P_i * np.tanh((np.asarray(t) - self.t0) / self.tau)

    def potential_along(self, t: ArrayLike) -> ArrayLike:
        """V0 exp(-2 z_c(t)), equal to E_i / cosh^2((t - t0)/tau)."""
        return self.E_i / np.cosh((np.asarray(t) - self.t0) / self.tau) ** 2

    def asymptote(self, t: ArrayLike) -> ArrayLike:
        """Free motion of an ideal mirror at xi_eff, xi_eff + P_i |t - t0|."""
        return self.xi_eff + self.P_i * np.abs(np.asarray(t) - self.t0)

    def time_to_turn(self, z: float) -> float:
        """Time needed to travel from height z down to the turning point."""
        return self.tau * math.acosh(math.sqrt(self.E_i / self.V0) * math.exp(z))


def classical_trajectory(E_i: float, t0: float, cfg: MirrorConfig) -> ClassicalTrajectory:
    if not E_i > 0.0:
        raise DomainError(f"incident energy must be positive, got {E_i}")
    return ClassicalTrajectory(t0=t0, E_i=E_i, V0=cfg.V0)


@dataclass(frozen=True)
class ClassicalKick:
    """
    Result of one integrated bounce.

    bounce_phase is omega t0 - phi at the measured velocity zero crossing.
    """

    delta_energy: float
    E_i: float
    relative_velocity: float
    t0: float
    bounce_phase: float
    steps: int

    @property
    def relative_energy(self) -> float:
        return self.delta_energy / self.E_i


@dataclass(frozen=True)
class KickSweep:
    phases: np.ndarray
    relative_energy: np.ndarray
    relative_velocity: np.ndarray


def _integrate_bounces(
    p_i: float,
    cfg: MirrorConfig,
    target_phases: np.ndarray,
    start_margin: float,
    steps_per_tau: int,
    budget_tau: float,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """
    Integrate M z'' = 2 V0 exp(-2z) (1 + eps sin(omega t - phi)) for a batch of
    bounce phases sharing one step size.

    Trajectories start at xi_eff + start_margin moving down with speed p_i and
    are timed so that the unmodulated turning point falls on the target phase.
    """
    E_i = 0.5 * p_i * p_i
    tau = 1.0 / p_i
    unmodulated = ClassicalTrajectory(t0=0.0, E_i=E_i, V0=cfg.V0)
    z_start = unmodulated.xi_eff + start_margin
    t_in = unmodulated.time_to_turn(z_start)
    t0_target = (target_phases + cfg.phi) / cfg.omega if cfg.omega > 0.0 else np.zeros_like(target_phases)
    t_start = t0_target - t_in

    Q = cfg.omega * tau
    h = tau / steps_per_tau * min(1.0, 1.0 / Q) if Q > 0.0 else tau / steps_per_tau
    max_steps = int(math.ceil((2.0 * t_in + budget_tau * tau) / h))

    def force(s: float, y: np.ndarray) -> np.ndarray:
        z, v = y
        t = t_start + s
        accel = np.where(
            z >= 0.0,
            2.0 * cfg.V0 * np.exp(-2.0 * np.maximum(z, 0.0)) * (1.0 + cfg.epsilon * np.sin(cfg.omega * t - cfg.phi)),
            0.0,
        )
        return np.array([v, accel])

    count = target_phases.size
    y = np.array([np.full(count, z_start), np.full(count, -p_i)])
    t0_measured = np.full(count, np.nan)
    v_exit = np.full(count, np.nan)
    s = 0.0
    for step in range(1, max_steps + 1):
        y_new = rk4_step(force, s, y, h)
        z_old, v_old = y
        z_new, v_new = y_new

        turned = np.isnan(t0_measured) & (v_old < 0.0) & (v_new >= 0.0)
        if turned.any():
            frac = -v_old[turned] / (v_new[turned] - v_old[turned])
            t0_measured[turned] = t_start[turned] + s + frac * h

        crossed = np.isnan(v_exit) & ~np.isnan(t0_measured) & (v_new > 0.0) & (z_new >= z_start)
        if crossed.any():
            frac = (z_start - z_old[crossed]) / (z_new[crossed] - z_old[crossed])
            v_exit[crossed] = v_old[crossed] + frac * (v_new[crossed] - v_old[crossed])

        y = y_new
        s += h
        if not np.isnan(v_exit).any():
            return v_exit, t0_measured, t_start, step

    missing = target_phases[np.isnan(v_exit)]
    raise IntegrationError(
        f"{missing.size} trajectories did not return to z={z_start:.3f} within {max_steps} steps "
        f"(phases {np.round(missing, 3).tolist()})"
    )


def classical_bounce_ode(
    p_i: float,
    cfg: MirrorConfig,
    t0_phase: float,
    start_margin: float = DEFAULT_START_MARGIN,
    steps_per_tau: int = DEFAULT_STEPS_PER_TAU,
    budget_tau: float = 40.0,
) -> ClassicalKick:
    """
    Integrate one classical bounce on the modulated mirror with fixed-step RK4.

    :param p_i: Incident momentum (scaled).
    :param cfg: Mirror configuration.
    :param t0_phase: Target value of omega t0 - phi at the turning time.
    :param start_margin: Start height above xi_eff, at least 8.
    :param steps_per_tau: Step is tau / steps_per_tau * min(1, 1/Q).
    :param budget_tau: Extra time allowed beyond the unmodulated round trip, in tau.
    :return: Kinetic energy change measured at the start height.
    :raises IntegrationError: If the atom does not come back within the budget.
    """
    if not p_i > 0.0:
        raise DomainError(f"incident momentum must be positive, got {p_i}")
    if start_margin < DEFAULT_START_MARGIN:
        raise DomainError(f"start margin must be at least {DEFAULT_START_MARGIN}, got {start_margin}")
    v_exit, t0, _, steps = _integrate_bounces(
        p_i, cfg, np.array([float(t0_phase)]), start_margin, steps_per_tau, budget_tau
    )
    E_i = 0.5 * p_i * p_i
    return ClassicalKick(
        delta_energy=0.5 * v_exit[0] ** 2 - E_i,
        E_i=E_i,
        relative_velocity=v_exit[0] / p_i - 1.0,
        t0=float(t0[0]),
        bounce_phase=cfg.omega * float(t0[0]) - cfg.phi,
        steps=steps,
    )


def kick_sweep(
    p_i: float,
    cfg: MirrorConfig,
    n_phases: int = 16,
    start_margin: float = DEFAULT_START_MARGIN,
    steps_per_tau: int = DEFAULT_STEPS_PER_TAU,
) -> KickSweep:
    """
    Energy and velocity kicks for n_phases equally spaced bounce phases,
    integrated together. Phases returned are the measured ones.
    """
    if n_phases < 1:
        raise DomainError(f"need at least one phase, got {n_phases}")
    targets = 2.0 * math.pi * np.arange(n_phases) / n_phases
    v_exit, t0, _, steps = _integrate_bounces(p_i, cfg, targets, start_margin, steps_per_tau, 40.0)
    logger.debug(f"Kick sweep at p_i={p_i}, omega={cfg.omega}: {n_phases} phases in {steps} steps")
    E_i = 0.5 * p_i * p_i
    return KickSweep(
        phases=cfg.omega * t0 - cfg.phi,
        relative_energy=(0.5 * v_exit**2 - E_i) / E_i,
        relative_velocity=v_exit / p_i - 1.0,
    )


def fit_kick(phases: Sequence[float], kicks: Sequence[float]) -> Tuple[float, float, float]:
    """
    Least-squares fit kicks ~ A cos(phase) + B sin(phase) + C.

    :return: (A, B, C)
    """
    phases = np.asarray(phases, dtype=float)
    design = np.column_stack([np.cos(phases), np.sin(phases), np.ones_like(phases)])
    coeffs, *_ = np.linalg.lstsq(design, np.asarray(kicks, dtype=float), rcond=None)
    return float(coeffs[0]), float(coeffs[1]), float(coeffs[2])


def predicted_kick(P_i: float, cfg: MirrorConfig, bounce_phase: ArrayLike) -> ArrayLike:
    """
    First-order relative energy change 2 epsilon Q beta(Q) cos(omega t0 - phi),
    obtained along the unmodulated trajectory.
    """
    Q = cfg.omega / P_i
    return 2.0 * cfg.epsilon * Q * beta(Q) * np.cos(bounce_phase)
