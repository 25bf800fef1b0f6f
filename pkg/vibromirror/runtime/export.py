# vibromirror/runtime/export.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

"""
Deterministic CSV and JSON writers.

Floats are written with their shortest round-trip representation and metadata
keys are sorted, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, Mapping, Sequence, Union

import numpy as np

if TYPE_CHECKING:
    from vibromirror.runtime.tdse import MomentumSpectrum, WavepacketState

Columns = Mapping[str, Sequence[Any]]


def format_value(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(_jsonable(value), sort_keys=True)
    return str(value)


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else repr(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def _check_columns(columns: Columns) -> int:
    lengths = {len(v) for v in columns.values()}
    if len(lengths) > 1:
        raise ValueError(f"columns have different lengths: { {k: len(v) for k, v in columns.items()} }")
    return lengths.pop() if lengths else 0


def write_csv(path: Union[str, Path], columns: Columns, metadata: Mapping[str, Any]) -> Path:
    """Write `# key: value` metadata lines, a header row and one row per sample."""
    path = Path(path)
    rows = _check_columns(columns)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        for key in sorted(metadata):
            handle.write(f"# {key}: {format_value(metadata[key])}\n")
        writer = csv.writer(handle, lineterminator="\n")
        names = list(columns)
        writer.writerow(names)
        for i in range(rows):
            writer.writerow([format_value(columns[name][i]) for name in names])
    return path


def write_json(path: Union[str, Path], columns: Columns, metadata: Mapping[str, Any]) -> Path:
    """Write {"metadata": ..., "columns": ...} with sorted keys."""
    path = Path(path)
    _check_columns(columns)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {"metadata": _jsonable(dict(metadata)), "columns": {k: _jsonable(list(v)) for k, v in columns.items()}}
    path.write_text(json.dumps(document, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def write_table(path: Union[str, Path], fmt: str, columns: Columns, metadata: Mapping[str, Any]) -> Path:
    if fmt == "csv":
        return write_csv(path, columns, metadata)
    if fmt == "json":
        return write_json(path, columns, metadata)
    raise ValueError(f"unknown output format '{fmt}'")


def read_csv_metadata(path: Union[str, Path]) -> Dict[str, str]:
    """The `# key: value` header of a file written by write_csv."""
    metadata: Dict[str, str] = {}
    with Path(path).open(encoding="utf-8") as handle:
        for line in handle:
            if not line.startswith("# "):
                break
            key, _, value = line[2:].rstrip("\n").partition(": ")
            metadata[key] = value
    return metadata


def spectrum_columns(spectrum: "MomentumSpectrum") -> Dict[str, np.ndarray]:
    return {
        "p": spectrum.p,
        "re": spectrum.amplitude.real,
        "im": spectrum.amplitude.imag,
        "abs2": spectrum.density,
        "normalized": spectrum.normalized,
    }


def wavepacket_columns(state: "WavepacketState") -> Dict[str, np.ndarray]:
    return {
        "z": state.grid.z,
        "re": state.psi.real,
        "im": state.psi.imag,
        "abs2": np.abs(state.psi) ** 2,
    }
