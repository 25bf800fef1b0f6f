# vibromirror/cli/runner.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

"""
Executes an ExperimentConfig: evaluates the chosen method over the sweep,
writes result files and maps library errors to exit codes.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np
import scipy
from pydantic import ValidationError

from vibromirror.cli.config import AmplitudeSource, ExperimentConfig, Method, Snapshot
from vibromirror.core.born import (
    PERTURBATIVE_LIMIT,
    asymmetry_ratio,
    born_probability,
    born_sidebands,
    sideband_momenta_exact,
)
from vibromirror.core.errors import (
    ClosedChannelError,
    ConfigurationError,
    DomainError,
    IntegrationError,
    MissingSidebandError,
    NumericalInstabilityError,
    PreconditionError,
)
from vibromirror.core.interferometer import (
    contrast_index,
    fringe_curve,
    fringe_from_tdse,
    max_fringe,
    optimize_fringe,
    plan_from_physics,
    semiclassical_spectra,
    tdse_bounce_amplitudes,
)
from vibromirror.core.mirror import MirrorConfig, fit_kick, kick_sweep
from vibromirror.core.semiclassical import (
    BESSEL_MAX_ARGUMENT,
    beta,
    max_velocity_change,
    modulation_index,
    sideband_amplitudes,
    validity_report,
)
from vibromirror.core.units import (
    PhysicalAtom,
    ScaledState,
    UnitSystem,
    arm_separation,
    bounce_height,
    effective_mirror_position,
    omega_for_transfer,
    velocity,
)
from vibromirror.core.validations import Validator
from vibromirror.runtime.concurrency import map_ordered
from vibromirror.runtime.export import spectrum_columns, wavepacket_columns, write_table
from vibromirror.runtime.tdse import run_bounce

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

Row = Dict[str, Any]


@dataclass
class RunReport:
    exit_code: int
    files: List[Path] = field(default_factory=list)
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.exit_code == EXIT_OK


def order_label(n: int) -> str:
    """Column suffix for sideband order n: m1, 0, p1, ..."""
    if n < 0:
        return f"m{-n}"
    return f"p{n}" if n > 0 else "0"


def package_version() -> str:
    try:
        return metadata.version("vibromirror")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def run_metadata(config: ExperimentConfig, **extra: Any) -> Dict[str, Any]:
    """Everything needed to reproduce a file: the flat config plus library versions."""
    meta: Dict[str, Any] = {f"config.{key}": value for key, value in config.to_flat().items()}
    meta["version.vibromirror"] = package_version()
    meta["version.numpy"] = np.__version__
    meta["version.scipy"] = scipy.__version__
    meta.update(extra)
    return meta


def config_from_metadata(meta: Dict[str, str]) -> ExperimentConfig:
    """Rebuild the config recorded by run_metadata."""
    flat = {key[len("config.") :]: value for key, value in meta.items() if key.startswith("config.")}
    return ExperimentConfig.from_flat(flat)


def output_path(config: ExperimentConfig, method: Optional[str] = None) -> Path:
    """config.out, or `<method>.<format>`; a method tag goes before the extension."""
    ext = config.format.value
    base = Path(config.out) if config.out else Path(f"{config.method.value}.{ext}")
    if method is None:
        return base
    stem = base.name[: -len(base.suffix)] if base.suffix else base.name
    return base.with_name(f"{stem}.{method}.{ext}")


def _mirror(config: ExperimentConfig) -> MirrorConfig:
    state = ScaledState.from_scaled(config.P_i, config.Q)
    return MirrorConfig.for_state(state, config.epsilon, config.phi, config.potential_amplitude())


def born_row(config: ExperimentConfig) -> Row:
    """First-sideband Born probabilities; the lower sideband is NaN once 2Q >= P_i closes it."""
    try:
        result = born_sidebands(config.P_i, config.Q, config.epsilon)
        ratio = asymmetry_ratio(config.P_i, config.Q)
    except ClosedChannelError:
        logger.warning(f"Lower sideband closed at P_i={config.P_i}, Q={config.Q}")
        P_plus = sideband_momenta_exact(config.P_i, config.Q, 1)
        W_plus = born_probability(config.P_i, P_plus, config.epsilon)
        return {
            "W_plus": W_plus,
            "W_minus": math.nan,
            "W_plus_flux": W_plus * config.P_i / P_plus,
            "W_minus_flux": math.nan,
            "asymmetry_approx": math.nan,
            "asymmetry_exact": math.nan,
            "perturbative": W_plus <= PERTURBATIVE_LIMIT,
        }
    return {
        "W_plus": result.W_plus,
        "W_minus": result.W_minus,
        "W_plus_flux": result.W_plus_flux,
        "W_minus_flux": result.W_minus_flux,
        "asymmetry_approx": ratio.approx,
        "asymmetry_exact": ratio.exact,
        "perturbative": result.perturbative,
    }


def semiclassical_row(config: ExperimentConfig) -> Row:
    state = ScaledState.from_scaled(config.P_i, config.Q, V0=config.potential_amplitude())
    cfg = _mirror(config)
    u = modulation_index(config.P_i, config.Q, config.epsilon)
    row: Row = {"u": u}
    if u > BESSEL_MAX_ARGUMENT:
        logger.warning(f"Index u={u:.3g} beyond {BESSEL_MAX_ARGUMENT} at Q={config.Q}; weights reported as NaN")
        row.update({f"weight_{order_label(n)}": math.nan for n in config.orders})
    else:
        spectrum = sideband_amplitudes(state, cfg)
        row.update({f"weight_{order_label(n)}": spectrum.weight(n) for n in config.orders})
    report = validity_report(state, cfg)
    row["dv_relative"] = max_velocity_change(state, cfg).relative
    row["regime"] = report.regime.value
    row["valid"] = report.valid
    return row


def classical_row(config: ExperimentConfig) -> Row:
    cfg = _mirror(config)
    sweep = kick_sweep(config.P_i, cfg, config.n_phases)
    A, B, C = fit_kick(sweep.phases, sweep.relative_energy)
    return {
        "kick_cos": A,
        "kick_sin": B,
        "kick_mean": C,
        "kick_predicted": 2.0 * config.epsilon * config.Q * beta(config.Q),
        "dv_max": float(np.max(np.abs(sweep.relative_velocity))),
        "dv_predicted": config.epsilon * config.Q * beta(config.Q),
    }


def tdse_row(config: ExperimentConfig) -> Row:
    result = run_bounce(config.bounce_setup())
    row: Row = {}
    for n in config.orders:
        peak = result.spectrum.sidebands.get(int(n))
        label = order_label(int(n))
        row[f"height_{label}"] = peak.height if peak else math.nan
        row[f"flux_height_{label}"] = peak.flux_height if peak else math.nan
        row[f"weight_{label}"] = peak.weight if peak else math.nan
    diagnostics = result.diagnostics
    row["norm_drift"] = diagnostics.norm_drift
    row["lost_fraction"] = diagnostics.lost_fraction
    row["bounce_phase"] = result.bounce_phase
    return row


_ROWS: Dict[str, Callable[[ExperimentConfig], Row]] = {
    Method.BORN.value: born_row,
    Method.SEMICLASSICAL.value: semiclassical_row,
    Method.CLASSICAL.value: classical_row,
    Method.TDSE.value: tdse_row,
}

_PARALLEL = {Method.CLASSICAL.value, Method.TDSE.value}


def _points(config: ExperimentConfig) -> List[ExperimentConfig]:
    sweep = config.sweep
    if sweep is None:
        return [config]
    return [config.at(value) for value in sweep.values()]


def _axis(config: ExperimentConfig, points: List[ExperimentConfig]) -> Dict[str, List[float]]:
    name = config.sweep_var or "Q"
    return {name: [getattr(p, name) for p in points]}


def _columns(axis: Dict[str, List[float]], rows: List[Row], prefix: str = "") -> Dict[str, List[Any]]:
    columns: Dict[str, List[Any]] = dict(axis)
    for key in rows[0]:
        columns[f"{prefix}{key}"] = [row[key] for row in rows]
    return columns


def _evaluate(method: str, points: List[ExperimentConfig], jobs: Optional[int]) -> List[Row]:
    fn = _ROWS[method]
    if method in _PARALLEL and len(points) > 1:
        return map_ordered(fn, points, jobs)
    return [fn(p) for p in points]


def _run_sweep(config: ExperimentConfig, jobs: Optional[int]) -> List[Path]:
    points = _points(config)
    rows = _evaluate(config.method.value, points, jobs)
    columns = _columns(_axis(config, points), rows)
    path = write_table(output_path(config), config.format.value, columns, run_metadata(config))
    return [path]


def _run_tdse(config: ExperimentConfig, jobs: Optional[int]) -> List[Path]:
    if config.sweep is not None:
        return _run_sweep(config, jobs)
    result = run_bounce(config.bounce_setup())
    sidebands = {
        order_label(n): {
            "expected_momentum": peak.expected_momentum,
            "peak_momentum": peak.peak_momentum,
            "height": peak.height,
            "flux_height": peak.flux_height,
            "weight": peak.weight,
            "amplitude": peak.amplitude,
        }
        for n, peak in sorted(result.spectrum.sidebands.items())
    }
    meta = run_metadata(
        config,
        sidebands=sidebands,
        diagnostics=result.diagnostics.as_dict(),
        bounce_phase=result.bounce_phase,
        t_final=result.final_state.t,
    )
    if config.snapshot is Snapshot.WAVEPACKET:
        columns = wavepacket_columns(result.final_state)
    else:
        columns = spectrum_columns(result.spectrum)
        columns["predicted"] = result.predicted.normalized
    return [write_table(output_path(config), config.format.value, columns, meta)]


def _run_compare(config: ExperimentConfig, jobs: Optional[int]) -> List[Path]:
    points = _points(config)
    axis = _axis(config, points)
    merged: Dict[str, List[Any]] = dict(axis)
    files: List[Path] = []
    for method in config.methods:
        rows = _evaluate(method, points, jobs)
        columns = _columns(axis, rows)
        files.append(
            write_table(output_path(config, method), config.format.value, columns, run_metadata(config, source=method))
        )
        merged.update(_columns({}, rows, prefix=f"{method}_"))
    files.insert(0, write_table(output_path(config), config.format.value, merged, run_metadata(config)))
    return files


def _run_interferometer(config: ExperimentConfig, jobs: Optional[int]) -> List[Path]:
    optimum = optimize_fringe()
    constrained = optimize_fringe(constrained=True)
    plan = plan_from_physics(config.P_i, config.Q, config.depths, targets=optimum)
    xi_eff = effective_mirror_position(config.P_i, config.potential_amplitude())
    spectra = semiclassical_spectra(plan, config.P_i, config.Q, xi_eff)
    thetas = np.linspace(0.0, 2.0 * math.pi, config.n_theta)
    columns: Dict[str, Any] = dict(fringe_curve(plan, spectra, thetas))
    extra: Dict[str, Any] = {
        "optimum": {"u1": optimum.u1, "u2": optimum.u2, "u3": optimum.u3, "F_max": optimum.F_max},
        "optimum_equal_indices": {"u": constrained.u1, "F_max": constrained.F_max},
        "plan_u": list(plan.u),
        "plan_F_max": float(np.max(np.abs(columns["fringe"]))),
        "contrast_index": contrast_index(),
    }
    if config.source is AmplitudeSource.TDSE:
        triplets = tdse_bounce_amplitudes(config.P_i, config.Q, config.depths, jobs, base=config.bounce_setup())
        columns["fringe_tdse"] = [fringe_from_tdse(triplets, theta) for theta in thetas]
        extra["tdse_F_max"] = max_fringe(triplets)
    return [write_table(output_path(config), config.format.value, columns, run_metadata(config, **extra))]


def _run_units(config: ExperimentConfig, jobs: Optional[int]) -> List[Path]:
    atom = PhysicalAtom.cesium()
    units = UnitSystem(atom)
    p = config.P_i * units.momentum
    q = config.Q * units.momentum
    omega = omega_for_transfer(config.P_i, config.Q, atom)
    dh, dt = arm_separation(p, q, atom)
    quantities = {
        "P_i": config.P_i,
        "Q": config.Q,
        "momentum_kg_m_s": p,
        "velocity_m_s": velocity(p, atom),
        "bounce_height_m": bounce_height(p, atom),
        "interaction_time_s": atom.mass / (atom.kappa * p),
        "omega_rad_s": omega,
        "modulation_frequency_hz": omega / (2.0 * math.pi),
        "momentum_step_kg_m_s": q,
        "arm_height_difference_m": dh,
        "arm_time_difference_s": dt,
    }
    columns = {"quantity": list(quantities), "value": list(quantities.values())}
    return [write_table(output_path(config), config.format.value, columns, run_metadata(config))]


_RUNNERS: Dict[Method, Callable[[ExperimentConfig, Optional[int]], List[Path]]] = {
    Method.BORN: _run_sweep,
    Method.SEMICLASSICAL: _run_sweep,
    Method.CLASSICAL: _run_sweep,
    Method.TDSE: _run_tdse,
    Method.COMPARE: _run_compare,
    Method.INTERFEROMETER: _run_interferometer,
    Method.UNITS: _run_units,
}


def run(config: ExperimentConfig, jobs: Optional[int] = None) -> RunReport:
    """
    Execute one experiment.

    :return: RunReport with exit code 0 on success, 2 for configuration or domain
        errors and 3 for numerical failures.
    """
    try:
        Validator().validate_experiment(config)
        logger.info(f"Running method '{config.method.value}'")
        files = _RUNNERS[config.method](config, jobs)
    except (ConfigurationError, DomainError, ValidationError) as exc:
        logger.error(f"Configuration error: {exc}")
        return RunReport(EXIT_CONFIG, message=str(exc))
    except NumericalInstabilityError as exc:
        message = f"{exc} diagnostics={json.dumps(exc.diagnostics, sort_keys=True, default=str)}"
        logger.error(f"Numerical failure: {message}")
        return RunReport(EXIT_NUMERICAL, message=message)
    except (IntegrationError, PreconditionError, MissingSidebandError) as exc:
        logger.error(f"Numerical failure: {exc}")
        return RunReport(EXIT_NUMERICAL, message=str(exc))
    for path in files:
        logger.info(f"Wrote {path}")
    return RunReport(EXIT_OK, files=files)
