# tests/unit/core/test_errors.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

import pytest

from vibromirror.core.errors import (
    ClosedChannelError,
    ConfigurationError,
    DomainError,
    IntegrationError,
    MirrorError,
    MissingSidebandError,
    NumericalInstabilityError,
    PreconditionError,
)


def test_mirror_error():
    """Test that MirrorError can be raised and caught."""
    with pytest.raises(MirrorError):
        raise MirrorError("Base error")


def test_domain_error_is_value_error():
    """Domain errors are also ValueErrors so generic callers can catch them."""
    with pytest.raises(ValueError):
        raise DomainError("bad argument")


def test_closed_channel_is_domain_error():
    with pytest.raises(DomainError):
        raise ClosedChannelError("closed")


@pytest.mark.parametrize(
    "error_class",
    [ConfigurationError, PreconditionError, IntegrationError, MissingSidebandError, NumericalInstabilityError],
)
def test_errors_share_base(error_class):
    """Every library error derives from MirrorError."""
    with pytest.raises(MirrorError):
        raise error_class("failure")


def test_numerical_instability_diagnostics():
    """Diagnostics are copied and default to an empty dict."""
    diagnostics = {"t": 0.1, "step": 10}
    err = NumericalInstabilityError("drift", diagnostics)
    diagnostics["t"] = 99.0

    assert err.diagnostics == {"t": 0.1, "step": 10}
    assert str(err) == "drift"
    assert NumericalInstabilityError("drift").diagnostics == {}
