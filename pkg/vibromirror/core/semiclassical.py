# vibromirror/core/semiclassical.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

"""
Phase-modulation model of the reflection.

The modulated mirror imprints a phase -u sin(omega t0) on the reflected wave.
Expanding that phase in Bessel functions gives the sideband amplitudes
a_n = J_n(u) exp(-i n q xi_eff) exp(i n phi).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Callable, Dict, Optional, Union

import numpy as np
from scipy import optimize

from vibromirror.core.errors import DomainError
from vibromirror.core.units import ScaledState, effective_mirror_position

if TYPE_CHECKING:
    from vibromirror.core.mirror import MirrorConfig

logger = logging.getLogger(__name__)

BESSEL_MAX_ORDER = 200
BESSEL_MAX_ARGUMENT = 50.0
_SERIES_LIMIT = 2.0
_RESCALE = 1e250

ArrayLike = Union[float, np.ndarray]


def beta(x: ArrayLike) -> ArrayLike:
    """
    Soft-mirror reduction factor (pi x / 2) / sinh(pi x / 2).

    Equal to one at x = 0 and exponentially small for large |x|. Accepts scalars
    or arrays.
    """
    y = np.abs(np.asarray(x, dtype=float)) * (math.pi / 2.0)
    small = y < 1e-4
    safe = np.where(small, 1.0, y)
    with np.errstate(over="ignore", under="ignore"):
        exact = 2.0 * safe * np.exp(-safe) / -np.expm1(-2.0 * safe)
    series = 1.0 - y * y / 6.0 + 7.0 * y**4 / 360.0
    result = np.where(small, series, exact)
    return float(result) if result.ndim == 0 else result


def _check_bessel_range(n: int, u: float) -> None:
    if abs(n) > BESSEL_MAX_ORDER:
        raise DomainError(f"Bessel order {n} outside |n| <= {BESSEL_MAX_ORDER}")
    if not math.isfinite(u) or abs(u) > BESSEL_MAX_ARGUMENT:
        raise DomainError(f"Bessel argument {u} outside |u| <= {BESSEL_MAX_ARGUMENT}")


def _series(n: int, x: float) -> float:
    """Power series for J_n(x), n >= 0, x > 0 small."""
    half = 0.5 * x
    term = math.exp(n * math.log(half) - math.lgamma(n + 1))
    total = term
    k = 0
    while abs(term) > 1e-18 * abs(total) and k < 80:
        k += 1
        term *= -half * half / (k * (k + n))
        total += term
    return total


def _miller_table(n_top: int, x: float) -> np.ndarray:
    """
    J_0..J_n_top at x > 0 by downward recurrence normalised with
    J_0 + 2 (J_2 + J_4 + ...) = 1.
    """
    start = max(n_top, int(math.ceil(x))) + 30 + int(math.sqrt(160.0 * max(n_top, x, 1.0)))
    start += start % 2
    values = np.zeros(start + 2)
    values[start] = 1e-30
    for k in range(start, 0, -1):
        values[k - 1] = (2.0 * k / x) * values[k] - values[k + 1]
        if abs(values[k - 1]) > _RESCALE:
            values[k - 1 :] /= _RESCALE
    norm = values[0] + 2.0 * values[2 : start + 1 : 2].sum()
    return values[: n_top + 1] / norm


def bessel_j(n: int, u: float) -> float:
    """
    Bessel function of the first kind J_n(u) for integer order.

    Uses the power series for |u| < 2 and normalised downward recurrence otherwise.

    :param n: Order, |n| <= 200.
    :param u: Argument, |u| <= 50.
    :raises DomainError: Outside that range.
    """
    n = int(n)
    u = float(u)
    _check_bessel_range(n, u)
    sign = 1.0
    if n < 0:
        n = -n
        sign *= -1.0 if n % 2 else 1.0
    if u < 0.0:
        u = -u
        sign *= -1.0 if n % 2 else 1.0
    if u == 0.0:
        return 1.0 if n == 0 else 0.0
    if u < _SERIES_LIMIT:
        return sign * _series(n, u)
    return sign * float(_miller_table(n, u)[n])


def bessel_j_orders(n_max: int, u: float) -> np.ndarray:
    """
    J_n(u) for n = -n_max..n_max in one sweep.

    :return: Array of length 2 n_max + 1, index n + n_max holds J_n(u).
    """
    _check_bessel_range(n_max, u)
    x = abs(float(u))
    if x == 0.0:
        positive = np.zeros(n_max + 1)
        positive[0] = 1.0
    elif x < _SERIES_LIMIT:
        positive = np.array([_series(k, x) for k in range(n_max + 1)])
    else:
        positive = _miller_table(n_max, x)
    parity = np.where(np.arange(n_max + 1) % 2 == 1, -1.0, 1.0)
    if u < 0.0:
        positive = positive * parity
    negative = (positive * parity)[:0:-1]
    return np.concatenate([negative, positive])


def find_root(f: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-13) -> float:
    """
    Root of f bracketed by [lo, hi], found by bisection.

    Used for the Bessel zeros and for the equal-amplitude point J_0(u) = J_1(u).
    """
    if f(lo) * f(hi) > 0.0:
        raise DomainError(f"root not bracketed in [{lo}, {hi}]")
    return float(optimize.bisect(f, lo, hi, xtol=xtol))


def modulation_index(P_i: float, Q: float, epsilon: float) -> float:
    """
    Modulation index u = epsilon P_i beta(Q).

    :param P_i: Incident momentum.
    :param Q: Scaled modulation frequency.
    :param epsilon: Modulation depth in [0, 1].
    """
    if P_i <= 0.0 or Q < 0.0 or not 0.0 <= epsilon <= 1.0:
        raise DomainError(f"modulation index needs P_i > 0, Q >= 0, 0 <= eps <= 1; got {P_i}, {Q}, {epsilon}")
    return epsilon * P_i * beta(Q)


def hard_mirror_index(P_i: float, z0: float) -> float:
    """Index 2 k z0 of an ideal mirror vibrating with amplitude z0."""
    if z0 < 0.0:
        raise DomainError(f"vibration amplitude must be non-negative, got {z0}")
    return 2.0 * P_i * z0


def phase_shift(P_i: float, Q: float, epsilon: float, bounce_phase: float) -> float:
    """Extra reflection phase -u sin(omega t0) for a bounce at phase omega t0."""
    return -modulation_index(P_i, Q, epsilon) * math.sin(bounce_phase)


class MomentumRule(str, Enum):
    """How a sideband order is mapped to a final momentum."""

    LINEARIZED = "linearized"
    EXACT = "exact"


@dataclass(frozen=True, eq=False)
class SidebandSpectrum:
    """
    Complex sideband amplitudes a_n of one reflection.

    Momenta are derived on request, linearised (P_i + n q) or from energy
    conservation (sqrt(P_i^2 + 2 n P_i Q)).
    """

    orders: np.ndarray
    amplitudes: np.ndarray
    carrier: float
    spacing: float
    u: float = 0.0
    phi: float = 0.0
    xi_eff: float = 0.0
    momentum_rule: MomentumRule = MomentumRule.EXACT
    _index: Dict[int, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {int(n): i for i, n in enumerate(self.orders)})

    def has_order(self, n: int) -> bool:
        return int(n) in self._index

    def amplitude(self, n: int) -> complex:
        """a_n; orders outside the stored range are zero."""
        i = self._index.get(int(n))
        return complex(self.amplitudes[i]) if i is not None else 0j

    def weight(self, n: int) -> float:
        return abs(self.amplitude(n)) ** 2

    @property
    def weights(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    @property
    def dominant_order(self) -> int:
        """Largest positive order of maximal weight; close to u for u >> 1."""
        w = self.weights
        candidates = self.orders[np.isclose(w, w.max(), rtol=1e-9, atol=0.0)]
        return int(np.abs(candidates).max())

    def momenta(self, rule: Optional[MomentumRule] = None) -> np.ndarray:
        """
        Final momentum of every stored order. Closed channels map to NaN.
        """
        rule = MomentumRule(rule or self.momentum_rule)
        n = self.orders.astype(float)
        if rule is MomentumRule.LINEARIZED:
            return self.carrier + n * self.spacing
        discriminant = self.carrier**2 + 2.0 * n * self.carrier * self.spacing
        with np.errstate(invalid="ignore"):
            return np.where(discriminant >= 0.0, np.sqrt(np.maximum(discriminant, 0.0)), np.nan)

    def with_phase(self, delta: float) -> "SidebandSpectrum":
        """Copy with the modulation phase advanced by delta (a_n -> a_n e^{i n delta})."""
        factors = np.exp(1j * self.orders * delta)
        return SidebandSpectrum(
            orders=self.orders,
            amplitudes=self.amplitudes * factors,
            carrier=self.carrier,
            spacing=self.spacing,
            u=self.u,
            phi=self.phi + delta,
            xi_eff=self.xi_eff,
            momentum_rule=self.momentum_rule,
        )


def default_order_count(u: float) -> int:
    return int(math.ceil(abs(u))) + 15


def sideband_amplitudes(state: ScaledState, cfg: "MirrorConfig", N_max: Optional[int] = None) -> SidebandSpectrum:
    """
    Sideband amplitudes of a reflection off the modulated mirror.

    :param state: Incident kinematics; xi_eff is taken from cfg.V0 when unset.
    :param cfg: Mirror configuration (epsilon, phi, V0). Its omega must match state.
    :param N_max: Highest order kept, at least ceil(u) + 10. Defaults to ceil(u) + 15.
    :return: SidebandSpectrum for orders -N_max..N_max.
    """
    if not math.isclose(cfg.omega, state.omega, rel_tol=1e-9, abs_tol=1e-12):
        raise DomainError(f"mirror omega {cfg.omega} does not match state omega {state.omega}")
    u = modulation_index(state.P_i, state.Q, cfg.epsilon)
    if N_max is None:
        N_max = default_order_count(u)
    elif N_max < math.ceil(u) + 10:
        raise DomainError(f"N_max={N_max} truncates the spectrum for u={u:.3f}; need at least {math.ceil(u) + 10}")
    xi_eff = state.xi_eff if state.xi_eff is not None else effective_mirror_position(state.P_i, cfg.V0)
    orders = np.arange(-N_max, N_max + 1)
    phases = np.exp(-1j * orders * state.q * xi_eff) * np.exp(1j * orders * cfg.phi)
    return SidebandSpectrum(
        orders=orders,
        amplitudes=bessel_j_orders(N_max, u) * phases,
        carrier=state.P_i,
        spacing=state.q,
        u=u,
        phi=cfg.phi,
        xi_eff=xi_eff,
    )


@dataclass(frozen=True)
class VelocityChange:
    """Largest velocity change over the bounce phase, in scaled units and relative to v_i."""

    delta_v: float
    relative: float
    dominant_order: float


def max_velocity_change(state: ScaledState, cfg: "MirrorConfig") -> VelocityChange:
    """
    Largest velocity change a classical bounce can pick up: epsilon Q beta(Q) v_i.

    The matching sideband order is about u.
    """
    if cfg.epsilon > 1.0:
        raise DomainError(f"epsilon must not exceed 1, got {cfg.epsilon}")
    relative = cfg.epsilon * state.Q * beta(state.Q)
    u = modulation_index(state.P_i, state.Q, cfg.epsilon)
    return VelocityChange(delta_v=relative * state.P_i, relative=relative, dominant_order=u)


class Regime(str, Enum):
    LOW_INDEX = "low_index"
    HIGH_INDEX = "high_index"


@dataclass(frozen=True)
class ValidityFlag:
    """One validity condition; margin is the ratio to its threshold, passing at >= 1."""

    name: str
    margin: float

    @property
    def passed(self) -> bool:
        return self.margin >= 1.0


@dataclass(frozen=True)
class ValidityReport:
    semiclassical: ValidityFlag
    micromotion: ValidityFlag
    low_index: ValidityFlag
    high_index: ValidityFlag
    regime: Regime
    u: float

    @property
    def index_bound(self) -> ValidityFlag:
        """The quasi-symmetry bound that applies in the current regime."""
        return self.low_index if self.regime is Regime.LOW_INDEX else self.high_index

    @property
    def flags(self) -> Dict[str, ValidityFlag]:
        return {f.name: f for f in (self.semiclassical, self.micromotion, self.low_index, self.high_index)}

    @property
    def valid(self) -> bool:
        return self.semiclassical.passed and self.micromotion.passed and self.index_bound.passed


def _ratio(numerator: float, denominator: float) -> float:
    return math.inf if denominator == 0.0 else numerator / denominator


def validity_report(state: ScaledState, cfg: "MirrorConfig") -> ValidityReport:
    """
    Margins of the conditions under which the phase-modulation model holds:
    P_i >> 1, Q >> 1 (taken as Q >= 3), 2 Q^2 << P_i at low index and
    2 (u Q)^2 << P_i at high index. The regime switches at u = 1.
    """
    u = modulation_index(state.P_i, state.Q, cfg.epsilon)
    report = ValidityReport(
        semiclassical=ValidityFlag("semiclassical", state.P_i),
        micromotion=ValidityFlag("micromotion", state.Q / 3.0),
        low_index=ValidityFlag("low_index", _ratio(state.P_i, 2.0 * state.Q**2)),
        high_index=ValidityFlag("high_index", _ratio(state.P_i, 2.0 * (u * state.Q) ** 2)),
        regime=Regime.LOW_INDEX if u < 1.0 else Regime.HIGH_INDEX,
        u=u,
    )
    failing = [f.name for f in report.flags.values() if not f.passed]
    if failing:
        logger.warning(f"Semiclassical validity margins below 1 at P_i={state.P_i}, Q={state.Q}: {failing}")
    return report
