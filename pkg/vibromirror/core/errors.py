# vibromirror/core/errors.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

from __future__ import annotations

from typing import Any, Dict, Optional


class MirrorError(Exception):
    """
    Base exception class for errors within the modulated-mirror simulation library.
    """

    pass


class DomainError(MirrorError, ValueError):
    """
    Raised when an argument lies outside the domain of the requested operation.
    """

    pass


class ClosedChannelError(DomainError):
    """
    Raised when a sideband order is energetically forbidden (negative final kinetic energy).
    """

    pass


class ConfigurationError(MirrorError):
    """
    Raised when a grid, wavepacket or experiment configuration cannot be used as given.
    """

    pass


class PreconditionError(MirrorError):
    """
    Raised when a state is not ready for the requested operation, e.g. a packet
    that is still inside the potential when its spectrum is requested.
    """

    pass


class IntegrationError(MirrorError):
    """
    Raised when the classical bounce integration does not return to its start height.
    """

    pass


class NumericalInstabilityError(MirrorError):
    """
    Raised when the wavepacket solver loses norm beyond the allowed drift.

    :param message: Human readable description.
    :param diagnostics: Solver state at the time of failure (time, step, norm, ...).
    """

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.diagnostics: Dict[str, Any] = dict(diagnostics or {})


class MissingSidebandError(MirrorError):
    """
    Raised when a sideband amplitude is required but was not found above the noise floor.
    """

    pass
