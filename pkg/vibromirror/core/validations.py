# vibromirror/core/validations.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

from __future__ import annotations

import math
from typing import TYPE_CHECKING

from vibromirror.core.errors import ConfigurationError

if TYPE_CHECKING:
    from vibromirror.cli.config import ExperimentConfig
    from vibromirror.runtime.tdse import GridSpec

POINTS_PER_WAVELENGTH = 8
KINETIC_STENCIL_MAX = 8.0 / 3.0
RK4_STABILITY_LIMIT = 2.5


class Validator:
    """
    Performs the cross-field checks of a simulation setup that no single model
    can do alone: grid resolution against the fastest sideband, time step
    against the largest eigenvalue, packet placement and experiment completeness.
    """

    def __init__(self) -> None:
        self._rules_engine = _ValidationRulesEngine()

    def validate_grid(self, grid: "GridSpec", p_max: float) -> None:
        """
        Check that the grid resolves momentum p_max with enough samples per wavelength.

        :param grid: The spatial grid.
        :param p_max: Largest momentum that must be represented.
        :raises ConfigurationError: If validation fails.
        """
        self._rules_engine.validate_grid(grid, p_max)

    def validate_stability(self, grid: "GridSpec", v_max: float) -> None:
        """
        Check that explicit RK4 stays stable with the largest potential value v_max.

        :raises ConfigurationError: If validation fails.
        """
        self._rules_engine.validate_stability(grid, v_max)

    def validate_packet(self, z_i: float, dz_i: float, turning_point: float) -> None:
        """
        Check that the packet starts well above the classical turning point.

        :raises ConfigurationError: If validation fails.
        """
        self._rules_engine.validate_packet(z_i, dz_i, turning_point)

    def validate_experiment(self, config: "ExperimentConfig") -> None:
        """
        Check that an experiment carries the fields its method needs.

        :raises ConfigurationError: If validation fails.
        """
        self._rules_engine.validate_experiment(config)


class _ValidationRulesEngine:
    """
    Internal engine applying the rule set. Centralizes validation logic for easier maintenance.
    """

    def __init__(self) -> None:
        self._default_rules = _DefaultValidationRules

    def validate_grid(self, grid: "GridSpec", p_max: float) -> None:
        self._default_rules.validate_resolution(grid, p_max)
        self._default_rules.validate_kinetic_step(grid)

    def validate_stability(self, grid: "GridSpec", v_max: float) -> None:
        self._default_rules.validate_kinetic_step(grid)
        self._default_rules.validate_total_step(grid, v_max)

    def validate_packet(self, z_i: float, dz_i: float, turning_point: float) -> None:
        self._default_rules.validate_packet_start(z_i, dz_i, turning_point)

    def validate_experiment(self, config: "ExperimentConfig") -> None:
        self._default_rules.validate_sweep(config)
        self._default_rules.validate_required_fields(config)


class _DefaultValidationRules:
    """
    Built-in rules. Each raises ConfigurationError with a message naming the offending values.
    """

    @staticmethod
    def validate_resolution(grid: "GridSpec", p_max: float) -> None:
        limit = 2.0 * math.pi / (POINTS_PER_WAVELENGTH * p_max)
        if grid.dz > limit:
            raise ConfigurationError(
                f"Grid spacing {grid.dz:.5g} too coarse for momentum {p_max:.5g}; "
                f"need dz <= {limit:.5g} ({POINTS_PER_WAVELENGTH} points per wavelength)"
            )

    @staticmethod
    def validate_kinetic_step(grid: "GridSpec") -> None:
        if grid.time_step > grid.stability_bound * (1.0 + 1e-12):
            raise ConfigurationError(f"Time step {grid.time_step:.5g} exceeds kinetic bound {grid.stability_bound:.5g}")

    @staticmethod
    def validate_total_step(grid: "GridSpec", v_max: float) -> None:
        spectral_radius = KINETIC_STENCIL_MAX / grid.dz**2 + v_max
        if spectral_radius * grid.time_step > RK4_STABILITY_LIMIT:
            raise ConfigurationError(
                f"Time step {grid.time_step:.5g} unstable for potential ceiling {v_max:.5g}; "
                f"|lambda| dt = {spectral_radius * grid.time_step:.3f} > {RK4_STABILITY_LIMIT}"
            )

    @staticmethod
    def validate_packet_start(z_i: float, dz_i: float, turning_point: float) -> None:
        if dz_i <= 0.0:
            raise ConfigurationError(f"Packet width must be positive, got {dz_i}")
        if z_i - 3.0 * dz_i <= turning_point:
            raise ConfigurationError(
                f"Packet at z_i={z_i} with width {dz_i} starts inside the mirror (turning point {turning_point:.3f})"
            )

    @staticmethod
    def validate_sweep(config: "ExperimentConfig") -> None:
        sweep = config.sweep
        if sweep is None:
            return
        if not config.supports_sweep():
            raise ConfigurationError(f"Method '{config.method.value}' does not take a sweep")
        if not (math.isfinite(sweep.start) and math.isfinite(sweep.stop)):
            raise ConfigurationError(f"Sweep bounds must be finite, got {sweep.start}..{sweep.stop}")
        if sweep.steps < 1:
            raise ConfigurationError(f"Sweep needs at least one step, got {sweep.steps}")

    @staticmethod
    def validate_required_fields(config: "ExperimentConfig") -> None:
        missing = [name for name in config.required_fields() if getattr(config, name) is None]
        if missing:
            raise ConfigurationError(f"Method '{config.method.value}' requires: {', '.join(missing)}")
