# tests/unit/core/test_validations.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

from unittest.mock import MagicMock

import pytest

from vibromirror.core.errors import ConfigurationError


def test_validator_init(validator):
    """Test validator initialization."""
    assert hasattr(validator, "_rules_engine")


def test_validate_grid_default_resolves_first_sidebands(validator):
    from vibromirror.runtime.tdse import GridSpec

    validator.validate_grid(GridSpec(), 105.4)


def test_validate_grid_too_coarse(validator):
    from vibromirror.runtime.tdse import GridSpec

    with pytest.raises(ConfigurationError, match="too coarse"):
        validator.validate_grid(GridSpec(n_points=1024), 105.4)


def test_validate_stability_default_ceiling(validator):
    """The default grid is stable with the potential capped at 32 E_i and eps = 1."""
    from vibromirror.runtime.tdse import GridSpec

    validator.validate_stability(GridSpec(), 2.0 * 32.0 * 5000.0)


def test_validate_stability_uncapped_potential(validator):
    """Without the cap, V0 = e^10 E_i at z = 0 would make RK4 blow up."""
    import math

    from vibromirror.runtime.tdse import GridSpec

    with pytest.raises(ConfigurationError, match="unstable"):
        validator.validate_stability(GridSpec(), math.exp(10.0) * 5000.0)


def test_validate_stability_rejects_long_step(validator):
    grid = MagicMock()
    grid.dz = 0.01
    grid.time_step = 1e-4
    grid.stability_bound = 1e-5

    with pytest.raises(ConfigurationError, match="kinetic bound"):
        validator.validate_stability(grid, 0.0)


def test_validate_packet(validator):
    validator.validate_packet(13.0, 2.0, 5.0)
    with pytest.raises(ConfigurationError, match="inside the mirror"):
        validator.validate_packet(10.0, 2.0, 5.0)
    with pytest.raises(ConfigurationError, match="width"):
        validator.validate_packet(13.0, 0.0, 5.0)


def test_validate_experiment_requires_q(validator):
    from vibromirror.cli.config import ExperimentConfig

    with pytest.raises(ConfigurationError, match="requires: Q"):
        validator.validate_experiment(ExperimentConfig(method="born"))


def test_validate_experiment_swept_q_is_not_required(validator):
    from vibromirror.cli.config import ExperimentConfig

    config = ExperimentConfig(method="born", sweep_var="Q", sweep_start=3.0, sweep_stop=6.0, sweep_steps=4)
    validator.validate_experiment(config)


def test_validate_experiment_rejects_sweep_for_units(validator):
    from vibromirror.cli.config import ExperimentConfig

    config = ExperimentConfig(
        method="units", Q=4.2, sweep_var="P_i", sweep_start=50.0, sweep_stop=100.0, sweep_steps=3
    )
    with pytest.raises(ConfigurationError, match="does not take a sweep"):
        validator.validate_experiment(config)


def test_validate_experiment_rejects_empty_sweep(validator):
    config = MagicMock()
    config.sweep.start = 1.0
    config.sweep.stop = 2.0
    config.sweep.steps = 0
    config.supports_sweep.return_value = True

    with pytest.raises(ConfigurationError, match="at least one step"):
        validator.validate_experiment(config)
