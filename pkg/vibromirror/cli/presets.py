# vibromirror/cli/presets.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

"""Named experiment configurations for the standard runs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List

from vibromirror.cli.config import AmplitudeSource, ExperimentConfig, Method, Snapshot
from vibromirror.core.errors import ConfigurationError


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    config: ExperimentConfig


_PRESETS: List[Preset] = [
    Preset(
        "fig1",
        "First sideband probability against Q at P_i = 100, eps = 1: Born, phase modulation and wavepacket",
        ExperimentConfig(
            method=Method.COMPARE,
            P_i=100.0,
            epsilon=1.0,
            orders=(-1, 0, 1),
            sweep_var="Q",
            sweep_start=1.0,
            sweep_stop=8.0,
            sweep_steps=15,
            out="fig1.csv",
        ),
    ),
    Preset(
        "fig3",
        "Position density of the reflected packet at P_i = 100, q = 5, eps = 1",
        ExperimentConfig(
            method=Method.TDSE,
            P_i=100.0,
            Q=5.0,
            epsilon=1.0,
            z_i=13.0,
            dz_i=2.0,
            snapshot=Snapshot.WAVEPACKET,
            out="fig3.csv",
        ),
    ),
    Preset(
        "fig4a",
        "Reflected momentum spectrum at P_i = 100, q = 4.2, eps = 0.6",
        ExperimentConfig(method=Method.TDSE, P_i=100.0, Q=4.2, epsilon=0.6, out="fig4a.csv"),
    ),
    Preset(
        "fig4b",
        "Reflected momentum spectrum at P_i = 100, q = 4.2, eps = 1",
        ExperimentConfig(method=Method.TDSE, P_i=100.0, Q=4.2, epsilon=1.0, out="fig4b.csv"),
    ),
    Preset(
        "section6-optimum",
        "Three-bounce interferometer at the fringe optimum, eps = (0.6, 1, 0.6), q = 4.2",
        ExperimentConfig(
            method=Method.INTERFEROMETER,
            P_i=100.0,
            Q=4.2,
            eps1=0.6,
            eps2=1.0,
            eps3=0.6,
            source=AmplitudeSource.SEMICLASSICAL,
            out="section6-optimum.csv",
        ),
    ),
    Preset(
        "cesium-units",
        "Cesium on an 852 nm evanescent wave: physical scales for P_i = 100, Q = 4.2",
        ExperimentConfig(method=Method.UNITS, P_i=100.0, Q=4.2, out="cesium-units.csv"),
    ),
]


def presets() -> List[Preset]:
    return list(_PRESETS)


def preset_names() -> List[str]:
    return [p.name for p in _PRESETS]


def get_preset(name: str) -> ExperimentConfig:
    """
    :raises ConfigurationError: If no preset has that name.
    """
    table: Dict[str, Preset] = {p.name: p for p in _PRESETS}
    try:
        return table[name].config
    except KeyError:
        raise ConfigurationError(f"unknown preset '{name}'; choose from {', '.join(table)}") from None
