# tests/unit/core/test_mirror.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

import math

import numpy as np
import pytest
from pydantic import ValidationError

from vibromirror.core.errors import DomainError, IntegrationError
from vibromirror.core.mirror import (
    DEFAULT_V0_FACTOR,
    ClassicalTrajectory,
    MirrorConfig,
    classical_bounce_ode,
    classical_trajectory,
    equivalent_displacement,
    fit_kick,
    kick_sweep,
    potential,
    predicted_kick,
)
from vibromirror.core.semiclassical import beta


def _mirror(P_i, Q, epsilon, phi=0.0):
    from vibromirror.core.units import ScaledState

    return MirrorConfig.for_state(ScaledState.from_scaled(P_i, Q), epsilon, phi)


def test_mirror_config_for_state(default_state):
    cfg = MirrorConfig.for_state(default_state, 0.5, phi=0.3)
    assert cfg.V0 == pytest.approx(DEFAULT_V0_FACTOR * 5000.0)
    assert cfg.omega == pytest.approx(420.0)
    assert cfg.epsilon == 0.5
    assert cfg.phi == 0.3


def test_mirror_config_rejects_depth_above_one():
    with pytest.raises(ValidationError):
        MirrorConfig(V0=1.0, epsilon=1.2)


def test_mirror_config_is_frozen():
    cfg = MirrorConfig(V0=1.0)
    with pytest.raises(ValidationError):
        cfg.V0 = 2.0


def test_potential_shape():
    cfg = MirrorConfig(V0=10.0, epsilon=0.5, omega=2.0, phi=0.1)
    t = 0.7
    envelope = 1.0 + 0.5 * math.sin(2.0 * t - 0.1)
    assert potential(0.0, t, cfg) == pytest.approx(10.0 * envelope)
    assert potential(1.5, t, cfg) == pytest.approx(10.0 * math.exp(-3.0) * envelope)
    assert potential(-0.1, t, cfg) == 0.0
    values = potential(np.array([-1.0, 0.0, 1.0]), t, cfg)
    assert values.shape == (3,)
    assert values[0] == 0.0


def test_equivalent_displacement_reproduces_potential():
    """V0 exp(-2 (z - z_m)) equals the modulated potential."""
    cfg = MirrorConfig(V0=3.0, epsilon=0.8, omega=1.0)
    for t in (0.2, 1.0, 4.0):
        z_m = equivalent_displacement(cfg, t)
        assert 3.0 * math.exp(-2.0 * (2.0 - z_m)) == pytest.approx(potential(2.0, t, cfg))


def test_equivalent_displacement_diverges_at_full_depth():
    cfg = MirrorConfig(V0=1.0, epsilon=1.0, omega=1.0)
    with pytest.raises(DomainError):
        equivalent_displacement(cfg, 1.5 * math.pi)


def test_classical_trajectory_geometry(xi_default):
    trajectory = classical_trajectory(5000.0, 0.2, MirrorConfig(V0=DEFAULT_V0_FACTOR * 5000.0))
    assert trajectory.P_i == pytest.approx(100.0)
    assert trajectory.tau == pytest.approx(0.01)
    assert trajectory.turning_point == pytest.approx(5.0)
    assert trajectory.xi_eff == pytest.approx(xi_default)
    assert trajectory.position(0.2) == pytest.approx(5.0)
    assert trajectory.velocity(0.2) == 0.0


def test_classical_trajectory_conserves_energy():
    trajectory = ClassicalTrajectory(t0=0.0, E_i=50.0, V0=1e6)
    t = np.linspace(-1.0, 1.0, 101)
    energy = 0.5 * trajectory.velocity(t) ** 2 + 1e6 * np.exp(-2.0 * trajectory.position(t))
    np.testing.assert_allclose(energy, 50.0, rtol=1e-10)
    np.testing.assert_allclose(trajectory.potential_along(t), 1e6 * np.exp(-2.0 * trajectory.position(t)), rtol=1e-10)


def test_classical_trajectory_asymptote():
    """Far from the bounce the particle moves like one reflected off a hard wall at xi_eff."""
    trajectory = ClassicalTrajectory(t0=1.0, E_i=5000.0, V0=DEFAULT_V0_FACTOR * 5000.0)
    for t in (1.0 - 20.0 * trajectory.tau, 1.0 + 20.0 * trajectory.tau):
        assert trajectory.position(t) == pytest.approx(trajectory.asymptote(t), abs=1e-10)


def test_time_to_turn_round_trip():
    trajectory = ClassicalTrajectory(t0=0.0, E_i=5000.0, V0=DEFAULT_V0_FACTOR * 5000.0)
    t = trajectory.time_to_turn(13.0)
    assert trajectory.position(-t) == pytest.approx(13.0)
    assert t == pytest.approx(0.01 * math.acosh(math.exp(8.0)))


def test_classical_trajectory_rejects_bad_energy():
    with pytest.raises(DomainError):
        classical_trajectory(0.0, 0.0, MirrorConfig(V0=1.0))


@pytest.mark.parametrize("P_i", [10.0, 100.0])
def test_unmodulated_bounce_is_elastic(P_i):
    kick = classical_bounce_ode(P_i, _mirror(P_i, 5.0, 0.0), 0.0)
    assert abs(kick.relative_energy) < 1e-8
    assert abs(kick.relative_velocity) < 1e-8
    assert kick.steps > 0


@pytest.mark.parametrize("phase", [0.0, 2.0, math.pi])
def test_bounce_kick_matches_first_order(phase):
    """eps = 0.01, Q = 5: dE/E = 2 eps Q beta(Q) cos(omega t0 - phi), about 6.1e-4 at cos = 1."""
    cfg = _mirror(100.0, 5.0, 0.01)
    kick = classical_bounce_ode(100.0, cfg, phase)
    assert kick.bounce_phase == pytest.approx(phase, abs=0.05)
    assert kick.relative_energy == pytest.approx(predicted_kick(100.0, cfg, phase), rel=0.02)
    assert predicted_kick(100.0, cfg, 0.0) == pytest.approx(0.00061, rel=1e-3)


def test_bounce_kick_respects_mirror_phase():
    """Only omega t0 - phi matters: the same bounce phase gives the same kick."""
    plain = classical_bounce_ode(100.0, _mirror(100.0, 5.0, 0.01), 1.0)
    shifted = classical_bounce_ode(100.0, _mirror(100.0, 5.0, 0.01, phi=0.7), 1.0)
    assert shifted.relative_energy == pytest.approx(plain.relative_energy, rel=1e-6)


@pytest.mark.parametrize("Q", [3.0, 5.0, 8.0])
def test_kick_sweep_fit(Q):
    """16 phases: the cosine coefficient is 2 eps Q beta(Q) and the peak velocity change eps Q beta(Q)."""
    cfg = _mirror(100.0, Q, 0.01)
    sweep = kick_sweep(100.0, cfg, 16)
    A, B, C = fit_kick(sweep.phases, sweep.relative_energy)
    amplitude = 2.0 * 0.01 * Q * beta(Q)

    assert sweep.phases.shape == (16,)
    assert A == pytest.approx(amplitude, rel=0.02)
    assert abs(B) < 0.02 * amplitude
    assert np.max(np.abs(sweep.relative_velocity)) == pytest.approx(0.5 * amplitude, rel=0.02)


def test_fit_kick_recovers_coefficients():
    phases = np.linspace(0.0, 2.0 * math.pi, 9, endpoint=False)
    A, B, C = fit_kick(phases, 0.3 * np.cos(phases) - 0.1 * np.sin(phases) + 0.05)
    assert (A, B, C) == pytest.approx((0.3, -0.1, 0.05))


def test_classical_bounce_rejects_bad_input():
    cfg = _mirror(100.0, 5.0, 0.01)
    with pytest.raises(DomainError):
        classical_bounce_ode(0.0, cfg, 0.0)
    with pytest.raises(DomainError, match="start margin"):
        classical_bounce_ode(100.0, cfg, 0.0, start_margin=4.0)
    with pytest.raises(DomainError):
        kick_sweep(100.0, cfg, 0)


def test_classical_bounce_budget_exhausted():
    with pytest.raises(IntegrationError, match="did not return"):
        classical_bounce_ode(100.0, _mirror(100.0, 5.0, 0.01), 0.0, budget_tau=-10.0)
