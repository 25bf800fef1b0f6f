# tests/conftest.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

import math
from functools import lru_cache

import pytest

from vibromirror.core.mirror import DEFAULT_V0_FACTOR


@pytest.fixture
def cesium():
    """Cesium on an 852 nm evanescent wave with standard gravity."""
    from vibromirror.core.units import PhysicalAtom

    return PhysicalAtom.cesium()


@pytest.fixture
def validator():
    """A Validator instance for testing."""
    from vibromirror.core.validations import Validator

    return Validator()


@pytest.fixture
def default_state():
    """P_i = 100, Q = 4.2 with the turning point at z = 5."""
    from vibromirror.core.units import ScaledState

    return ScaledState.from_scaled(100.0, 4.2, V0=DEFAULT_V0_FACTOR * 5000.0)


@pytest.fixture
def default_mirror(default_state):
    """Fully modulated mirror matched to default_state."""
    from vibromirror.core.mirror import MirrorConfig

    return MirrorConfig.for_state(default_state, 1.0)


@pytest.fixture
def xi_default():
    return 5.0 - math.log(2.0)


@lru_cache(maxsize=None)
def _cached_bounce(setup):
    from vibromirror.runtime.tdse import run_bounce

    return run_bounce(setup)


@pytest.fixture(scope="session")
def bounce():
    """run_bounce memoised for the whole session; BounceSetup is frozen and hashable."""
    return _cached_bounce
