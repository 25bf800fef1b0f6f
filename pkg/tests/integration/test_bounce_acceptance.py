# tests/integration/test_bounce_acceptance.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

"""
Full wavepacket bounces checked against the phase-modulation model, the Born
asymmetry and the numerical invariants of the solver. Each setup is simulated
once per session through the `bounce` fixture.
"""

import math

import numpy as np
import pytest

from vibromirror.core.born import asymmetry_ratio
from vibromirror.core.semiclassical import bessel_j, modulation_index
from vibromirror.runtime.tdse import EDGE_LIMIT, BounceSetup, GridSpec, evolve, momentum_spectrum, potential_fraction

pytestmark = [pytest.mark.slow, pytest.mark.integration]

FIG4A = BounceSetup(epsilon=0.6)
FIG4B = BounceSetup(epsilon=1.0)


def _geometric_first_sidebands(result):
    upper = result.spectrum.sideband(1).flux_height
    lower = result.spectrum.sideband(-1).flux_height
    return math.sqrt(upper * lower)


class TestElasticBounce:
    def test_unmodulated_mirror_reflects_the_packet(self, bounce):
        """Without modulation only the carrier comes back, at +P_i with its incident height."""
        result = bounce(BounceSetup(epsilon=0.0))
        spectrum = result.spectrum

        assert spectrum.sideband(0).height == pytest.approx(1.0, rel=1e-3)
        for n in (-1, 1):
            if n in spectrum.sidebands:
                assert spectrum.sidebands[n].height < 1e-8
        assert result.final_state.mean_momentum() == pytest.approx(100.0, abs=0.01)
        assert result.diagnostics.norm_drift <= 1e-6


class TestSidebandSpectrum:
    @pytest.mark.parametrize(
        "setup",
        [FIG4A, FIG4B, BounceSetup(Q=5.0), BounceSetup(Q=6.0)],
        ids=["q4.2-eps0.6", "q4.2-eps1", "q5-eps1", "q6-eps1"],
    )
    def test_first_sidebands_follow_bessel_weights(self, bounce, setup):
        """Geometric mean of the first sidebands within 15 % of J1(u)^2."""
        result = bounce(setup)
        u = modulation_index(setup.P_i, setup.Q, setup.epsilon)
        assert _geometric_first_sidebands(result) == pytest.approx(bessel_j(1, u) ** 2, rel=0.15)

    @pytest.mark.parametrize(
        "setup",
        [FIG4A, BounceSetup(Q=5.0), BounceSetup(Q=6.0)],
        ids=["q4.2-eps0.6", "q5-eps1", "q6-eps1"],
    )
    def test_upper_sideband_is_stronger(self, bounce, setup):
        """The upper sideband wins, within a factor 1.5 of the Born ratio exp(pi Q^2 / P_i)."""
        result = bounce(setup)
        measured = result.spectrum.sideband(1).flux_height / result.spectrum.sideband(-1).flux_height
        expected = asymmetry_ratio(setup.P_i, setup.Q).approx
        assert expected > 1.0
        assert measured > 1.0
        assert expected / 1.5 <= measured <= expected * 1.5

    def test_peaks_sit_at_exact_dispersion_momenta(self, bounce):
        result = bounce(FIG4B)
        for n in (-1, 0, 1):
            peak = result.spectrum.sideband(n)
            assert abs(peak.peak_momentum - peak.expected_momentum) < FIG4B.grid.dp

    @pytest.mark.parametrize("setup", [FIG4A, FIG4B], ids=["eps0.6", "eps1"])
    def test_solver_diagnostics(self, bounce, setup):
        diagnostics = bounce(setup).diagnostics
        assert diagnostics.norm_drift <= 1e-6
        assert diagnostics.lost_fraction < 1e-4
        assert diagnostics.edge_probability < 1e-4

    @pytest.mark.parametrize("setup", [BounceSetup(epsilon=0.0), FIG4A, FIG4B], ids=["eps0", "eps0.6", "eps1"])
    def test_spectrum_is_taken_between_mirror_and_wall(self, bounce, setup):
        """The default box leaves room to read the spectrum after the mirror and before the wall."""
        result = bounce(setup)
        final = result.final_state
        assert final.t >= setup.t_end() - 1e-12
        assert potential_fraction(final, setup.mirror()) < setup.clear_threshold
        assert final.edge_probability() < EDGE_LIMIT
        assert final.mean_position() < setup.grid.z_max - 8.0

    def test_predicted_spectrum_overlays_the_measurement(self, bounce):
        result = bounce(FIG4A)
        k = int(np.argmin(np.abs(result.spectrum.p - result.spectrum.sideband(0).bin_momentum)))
        assert result.predicted.normalized[k] == pytest.approx(result.spectrum.normalized[k], rel=0.15)


class TestInterferometerFromBounces:
    def test_fringe_from_measured_amplitudes(self, bounce):
        """Bounces at eps = (0.6, 1, 0.6) reproduce the optimum fringe amplitude."""
        from vibromirror.core.interferometer import max_fringe

        first = bounce(FIG4A).amplitudes()
        second = bounce(FIG4B).amplitudes()
        assert max_fringe([first, second, first]) == pytest.approx(0.081, abs=0.004)


class TestNumericalInvariants:
    def test_spectrum_does_not_depend_on_when_it_is_taken(self, bounce):
        """Once clear of the mirror, further free flight leaves |psi(p)|^2 unchanged."""
        setup = BounceSetup(epsilon=0.6, grid=GridSpec(z_min=-5.0, z_max=45.0, n_points=8192), clearance=14.0)
        result = bounce(setup)
        later = evolve(result.final_state, setup.mirror(), result.final_state.t + 1.0 / setup.P_i)

        before = momentum_spectrum(result.final_state).density
        after = momentum_spectrum(later).density
        assert np.max(np.abs(after - before)) < 1e-8 * before.max()

    def test_sideband_weights_do_not_depend_on_packet_width(self, bounce):
        grid = GridSpec(z_min=-5.0, z_max=55.0, n_points=9831)
        narrow = bounce(BounceSetup(epsilon=0.6, grid=grid, z_i=25.0, dz_i=2.0))
        wide = bounce(BounceSetup(epsilon=0.6, grid=grid, z_i=25.0, dz_i=4.0))
        for n in (-1, 1):
            assert wide.spectrum.sideband(n).weight == pytest.approx(narrow.spectrum.sideband(n).weight, rel=0.02)

    def test_grid_convergence(self, bounce):
        """Doubling the points at P_i = 20 moves the sideband heights by less than 1 %."""
        coarse = bounce(BounceSetup(P_i=20.0, grid=GridSpec(n_points=2048)))
        fine = bounce(BounceSetup(P_i=20.0, grid=GridSpec(n_points=4096)))
        for n in (-1, 0, 1):
            assert fine.spectrum.sideband(n).height == pytest.approx(coarse.spectrum.sideband(n).height, rel=0.01)

    def test_halving_the_step_reduces_norm_drift(self, bounce):
        grid = GridSpec(n_points=2048)
        coarse = bounce(BounceSetup(P_i=20.0, grid=grid)).diagnostics.norm_drift
        fine = bounce(BounceSetup(P_i=20.0, grid=grid.halved_step())).diagnostics.norm_drift
        assert fine * 8.0 <= coarse or coarse < 1e-11
