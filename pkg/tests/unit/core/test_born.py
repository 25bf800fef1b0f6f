# tests/unit/core/test_born.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

import logging
import math

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from vibromirror.core.born import (
    asymmetry_ratio,
    born_agreement,
    born_probability,
    born_sidebands,
    log_sinh,
    quantum_limit,
    semiclassical_limit,
    sideband_momenta_exact,
)
from vibromirror.core.errors import ClosedChannelError, DomainError
from vibromirror.core.semiclassical import beta


@pytest.mark.parametrize("x", [1e-6, 5e-3, 0.5, 5.0, 19.9, 20.1, 300.0])
def test_log_sinh(x):
    if x < 300.0:
        assert log_sinh(x) == pytest.approx(math.log(math.sinh(x)), rel=1e-12)
    else:
        assert log_sinh(x) == pytest.approx(x - math.log(2.0), rel=1e-15)
    assert log_sinh(-x) == log_sinh(x)


def test_born_probability_rejects_bad_input():
    with pytest.raises(DomainError):
        born_probability(0.0, 1.0, 0.5)
    with pytest.raises(DomainError):
        born_probability(1.0, -1.0, 0.5)
    with pytest.raises(DomainError):
        born_probability(1.0, 2.0, 1.5)


def test_born_probability_unmodulated_is_zero():
    assert born_probability(100.0, 104.0, 0.0) == 0.0


def test_born_probability_elastic_limit_is_finite():
    """P_f = P_i takes the analytic limit of the D / sinh(pi D / 2) factor."""
    value = born_probability(10.0, 10.0, 0.2)
    assert math.isfinite(value)
    assert value == pytest.approx(born_probability(10.0, 10.0 + 1e-9, 0.2), rel=1e-6)


@given(
    P_i=st.floats(min_value=0.01, max_value=300.0),
    P_f=st.floats(min_value=0.01, max_value=300.0),
    epsilon=st.floats(min_value=0.001, max_value=1.0),
)
def test_born_probability_is_symmetric(P_i, P_f, epsilon):
    assert born_probability(P_i, P_f, epsilon) == pytest.approx(born_probability(P_f, P_i, epsilon), rel=1e-10)


@given(
    P_i=st.floats(min_value=0.01, max_value=24.9),
    P_f=st.floats(min_value=0.01, max_value=24.9),
    epsilon=st.floats(min_value=0.01, max_value=1.0),
)
def test_born_probability_matches_direct_evaluation(P_i, P_f, epsilon):
    """Below P_i + P_f = 50 the sinh products fit in a double and the plain formula can be used as a reference."""
    assume(P_i != P_f)
    total, diff = P_i + P_f, P_i - P_f
    direct = (
        (epsilon * math.pi) ** 2
        / 64.0
        * math.sinh(math.pi * P_i)
        * math.sinh(math.pi * P_f)
        * (total * diff / (math.sinh(0.5 * math.pi * total) * math.sinh(0.5 * math.pi * diff))) ** 2
    )
    assert born_probability(P_i, P_f, epsilon) == pytest.approx(direct, rel=1e-10)


@pytest.mark.parametrize("P_i,P_f", [(0.01, 0.01), (0.02, 0.05), (0.05, 0.05)])
def test_quantum_limit(P_i, P_f):
    """Small momenta: W -> (eps^2 / 4) P_i P_f within 1 %."""
    assert born_probability(P_i, P_f, 0.3) == pytest.approx(quantum_limit(P_i, P_f, 0.3), rel=0.01)


@pytest.mark.parametrize("P_i", [50.0, 100.0, 200.0])
@pytest.mark.parametrize("delta", [-6.0, -2.0, 1.0, 4.2, 6.0])
def test_semiclassical_limit_midpoint(P_i, delta):
    """At large momenta W equals (eps^2 / 4) Pbar^2 beta^2(dP) up to exp(-2 pi P) terms."""
    P_f = P_i + delta
    assert born_probability(P_i, P_f, 0.7) == pytest.approx(semiclassical_limit(P_i, P_f, 0.7), rel=1e-9)


@pytest.mark.parametrize("Q,n", [(1.0, 1), (3.0, 1), (6.0, 1), (1.0, -1), (3.0, -1), (5.0, -1)])
def test_semiclassical_limit_flux_normalised(Q, n):
    """W p_i / p_f matches (eps^2 / 4) P_i^2 beta^2(dP) to 0.1 % at P_i = 100, |dP| <= 6."""
    P_i = 100.0
    P_f = sideband_momenta_exact(P_i, Q, n)
    assert abs(P_f - P_i) <= 6.0
    flux = born_probability(P_i, P_f, 1.0) * P_i / P_f
    assert flux == pytest.approx(0.25 * P_i**2 * beta(P_f - P_i) ** 2, rel=1e-3)
    assert semiclassical_limit(P_i, P_f, 1.0, midpoint=False) == pytest.approx(0.25 * P_i**2 * beta(P_f - P_i) ** 2)


def test_sideband_momenta_exact():
    assert sideband_momenta_exact(100.0, 4.2, 1) == pytest.approx(104.1153, abs=1e-4)
    assert sideband_momenta_exact(100.0, 4.2, -1) == pytest.approx(95.7079, abs=1e-4)
    assert sideband_momenta_exact(100.0, 4.2, 0) == 100.0
    with pytest.raises(ClosedChannelError):
        sideband_momenta_exact(10.0, 6.0, -1)


def test_asymmetry_ratio():
    """Upper over lower sideband is close to exp(pi Q^2 / P_i)."""
    ratio = asymmetry_ratio(100.0, 4.2)
    assert ratio.approx == pytest.approx(math.exp(math.pi * 4.2**2 / 100.0))
    assert ratio.exact == pytest.approx(ratio.approx, rel=0.01)
    assert ratio.exact > 1.0


def test_asymmetry_ratio_closed_lower_channel():
    with pytest.raises(ClosedChannelError):
        asymmetry_ratio(5.0, 3.0)


def test_born_sidebands_flux_normalisation():
    result = born_sidebands(100.0, 6.0, 1.0)
    assert result.P_plus == pytest.approx(math.sqrt(11200.0))
    assert result.W_plus_flux == pytest.approx(result.W_plus * 100.0 / result.P_plus)
    assert result.W_minus_flux == pytest.approx(result.W_minus * 100.0 / result.P_minus)
    assert result.W_plus > result.W_minus
    assert result.perturbative


@pytest.mark.parametrize("P_i, Q", [(10.0, 5.0), (10.0, 6.0)], ids=["threshold", "closed"])
def test_born_sidebands_lower_channel_not_open(P_i, Q):
    with pytest.raises(ClosedChannelError):
        born_sidebands(P_i, Q, 0.5)


def test_born_sidebands_warns_outside_perturbative_regime(caplog):
    with caplog.at_level(logging.WARNING):
        result = born_sidebands(100.0, 1.0, 1.0)
    assert not result.perturbative
    assert "exceed" in caplog.text


@pytest.mark.parametrize("Q", [5.0, 5.5, 6.0])
def test_born_agrees_with_phase_modulation_at_full_depth(Q):
    """Low index at eps = 1: |a_1|^2 within 25 % of the geometric mean of the Born sidebands."""
    agreement = born_agreement(100.0, Q, 1.0)
    assert agreement.geometric_ratio == pytest.approx(1.0, rel=0.25)


@pytest.mark.parametrize("Q", [3.0, 3.5, 4.2, 5.0, 6.0])
def test_born_agrees_with_phase_modulation_at_small_depth(Q):
    agreement = born_agreement(100.0, Q, 0.01)
    assert agreement.geometric_ratio == pytest.approx(1.0, rel=0.05)
    assert agreement.upper_ratio < agreement.geometric_ratio
