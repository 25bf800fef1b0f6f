# vibromirror/runtime/tdse.py
# Copyright (c) 2024 Brad Edwards
# Licensed under the MIT License - see LICENSE file for details

"""
Direct integration of the time-dependent Schroedinger equation for a Gaussian
wavepacket bouncing on the modulated mirror, and the momentum-space analysis
of the reflected packet.

The grid is a box with psi = 0 on both walls. Time stepping is explicit RK4 on
the interior points; the second derivative uses the five-point stencil.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import fft, sparse
from scipy.special import erfc
from typing_extensions import Annotated

from vibromirror.core.born import sideband_momenta_exact
from vibromirror.core.errors import (
    ClosedChannelError,
    ConfigurationError,
    DomainError,
    MissingSidebandError,
    NumericalInstabilityError,
    PreconditionError,
)
from vibromirror.core.mirror import DEFAULT_V0_FACTOR, ClassicalTrajectory, MirrorConfig, potential
from vibromirror.core.semiclassical import MomentumRule, SidebandSpectrum, beta, bessel_j, sideband_amplitudes
from vibromirror.core.units import ScaledState
from vibromirror.core.validations import Validator
from vibromirror.runtime.integrators import rk4_step

logger = logging.getLogger(__name__)

DEFAULT_CEILING_FACTOR = 32.0
DEFAULT_CLEAR_THRESHOLD = 1e-5
OVERLAP_LIMIT = 1e-8
EDGE_LIMIT = 1e-4
MAX_NORM_DRIFT = 1e-4
DEFAULT_STEP_FRACTION = 0.5
EDGE_MARGIN = 0.5
DEFAULT_CLEAR_STEP = 0.25


class GridSpec(BaseModel):
    """
    Uniform grid on [z_min, z_max] including both wall points.

    dt defaults to half the kinetic RK4 bound dz^2 / pi^2; an explicit dt may go
    up to the bound itself.
    """

    model_config = ConfigDict(frozen=True)

    z_min: float = -25.0
    z_max: float = 25.0
    n_points: Annotated[int, Field(ge=16)] = 8192
    dt: Optional[Annotated[float, Field(gt=0.0)]] = None

    @model_validator(mode="after")
    def _check_bounds(self) -> "GridSpec":
        if not self.z_max > self.z_min:
            raise ValueError(f"z_max ({self.z_max}) must exceed z_min ({self.z_min})")
        if self.dt is not None and self.dt > self.stability_bound * (1.0 + 1e-12):
            raise ValueError(f"dt={self.dt} exceeds the RK4 kinetic bound {self.stability_bound}")
        return self

    @property
    def dz(self) -> float:
        return (self.z_max - self.z_min) / (self.n_points - 1)

    @property
    def stability_bound(self) -> float:
        return 0.5 * (2.0 / math.pi**2) * self.dz**2

    @property
    def time_step(self) -> float:
        return self.dt if self.dt is not None else DEFAULT_STEP_FRACTION * self.stability_bound

    @property
    def z(self) -> np.ndarray:
        return np.linspace(self.z_min, self.z_max, self.n_points)

    @property
    def dp(self) -> float:
        """Momentum resolution of the discrete Fourier transform."""
        return 2.0 * math.pi / (self.n_points * self.dz)

    def halved_step(self) -> "GridSpec":
        return self.model_copy(update={"dt": 0.5 * self.time_step})


@dataclass(frozen=True)
class EvolutionDiagnostics:
    steps: int = 0
    norm_drift: float = 0.0
    energy_drift: float = 0.0
    lost_fraction: float = 0.0
    edge_probability: float = 0.0

    def as_dict(self) -> Dict[str, float]:
        return {
            "steps": self.steps,
            "norm_drift": self.norm_drift,
            "energy_drift": self.energy_drift,
            "lost_fraction": self.lost_fraction,
            "edge_probability": self.edge_probability,
        }


@dataclass(frozen=True, eq=False)
class WavepacketState:
    """
    Samples of psi on the grid at time t. The wall samples are always zero.

    carrier is the incident momentum magnitude, used to scale the potential ceiling.
    """

    grid: GridSpec
    psi: np.ndarray
    t: float = 0.0
    carrier: Optional[float] = None
    diagnostics: EvolutionDiagnostics = field(default_factory=EvolutionDiagnostics)

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.grid.dz)

    def probability_below(self, z: float) -> float:
        mask = self.grid.z < z
        return float(np.sum(np.abs(self.psi[mask]) ** 2) * self.grid.dz)

    def probability_above(self, z: float) -> float:
        mask = self.grid.z > z
        return float(np.sum(np.abs(self.psi[mask]) ** 2) * self.grid.dz)

    def edge_probability(self, margin: float = EDGE_MARGIN) -> float:
        return self.probability_below(self.grid.z_min + margin) + self.probability_above(self.grid.z_max - margin)

    def mean_position(self) -> float:
        density = np.abs(self.psi) ** 2
        return float(np.sum(self.grid.z * density) / np.sum(density))

    def mean_momentum(self) -> float:
        """<p> from the discrete Fourier transform."""
        p = fft.fftfreq(self.grid.n_points, d=self.grid.dz) * 2.0 * math.pi
        density = np.abs(fft.fft(self.psi)) ** 2
        return float(np.sum(p * density) / np.sum(density))

    def kinetic_energy(self) -> float:
        interior = self.psi[1:-1]
        kinetic = _kinetic_operator(self.grid.n_points - 2, self.grid.dz)
        return float(np.real(np.vdot(interior, kinetic @ interior)) * self.grid.dz)

    def potential_energy(self, cfg: MirrorConfig) -> float:
        values = potential(self.grid.z, self.t, cfg)
        return float(np.sum(values * np.abs(self.psi) ** 2) * self.grid.dz)

    def reference_energy(self) -> float:
        if self.carrier is not None:
            return 0.5 * self.carrier**2
        return self.kinetic_energy() / self.norm()


@lru_cache(maxsize=16)
def _kinetic_operator(size: int, dz: float) -> sparse.csr_matrix:
    """-1/2 d^2/dz^2 with the five-point stencil on the interior points."""
    c = 1.0 / (24.0 * dz * dz)
    return sparse.diags(
        [c, -16.0 * c, 30.0 * c, -16.0 * c, c],
        [-2, -1, 0, 1, 2],
        shape=(size, size),
        format="csr",
    )


def init_gaussian(
    z_i: float,
    dz_i: float,
    p_i: float,
    grid: GridSpec,
    cfg: Optional[MirrorConfig] = None,
) -> WavepacketState:
    """
    Minimum-uncertainty packet centred at z_i, width dz_i, moving toward the
    mirror with momentum -p_i.

    :param z_i: Centre position.
    :param dz_i: Standard deviation in position; the momentum width is 1/(2 dz_i).
    :param p_i: Carrier momentum magnitude.
    :param grid: Spatial grid.
    :param cfg: When given, the packet must start three widths above the turning point.
    :raises ConfigurationError: If the packet starts in the mirror or overlaps z < 0 or a wall.
    """
    if dz_i <= 0.0 or p_i <= 0.0:
        raise ConfigurationError(f"packet needs dz_i > 0 and p_i > 0, got dz_i={dz_i}, p_i={p_i}")
    if cfg is not None:
        turning_point = 0.5 * math.log(cfg.V0 / (0.5 * p_i * p_i))
        Validator().validate_packet(z_i, dz_i, turning_point)

    scale = math.sqrt(2.0) * dz_i
    overlap = 0.5 * erfc(z_i / scale) + 0.5 * erfc((grid.z_max - z_i) / scale) + 0.5 * erfc((z_i - grid.z_min) / scale)
    if overlap > OVERLAP_LIMIT:
        raise ConfigurationError(
            f"packet at z_i={z_i}, dz_i={dz_i} overlaps the mirror surface or the box walls (probability {overlap:.2e})"
        )

    z = grid.z
    psi = np.exp(-((z - z_i) ** 2) / (4.0 * dz_i**2) - 1j * p_i * z)
    psi[0] = psi[-1] = 0.0
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dz)
    return WavepacketState(grid=grid, psi=psi, t=0.0, carrier=p_i)


def evolve(
    state: WavepacketState,
    cfg: MirrorConfig,
    t_end: float,
    ceiling_factor: float = DEFAULT_CEILING_FACTOR,
    check_every: int = 500,
) -> WavepacketState:
    """
    Integrate i dpsi/dt = [-1/2 d^2/dz^2 + V(z, t)] psi from state.t to t_end.

    The static potential is capped at ceiling_factor times the carrier energy,
    far above any energy the packet can reach.

    :raises ConfigurationError: If the step is unstable for the capped potential.
    :raises NumericalInstabilityError: If the norm drifts by more than 1e-4.
    """
    if t_end < state.t:
        raise DomainError(f"cannot evolve backwards from t={state.t} to t={t_end}")
    grid = state.grid
    ceiling = ceiling_factor * state.reference_energy()
    Validator().validate_stability(grid, ceiling * (1.0 + cfg.epsilon))

    z = grid.z[1:-1]
    static = np.where(z >= 0.0, np.minimum(cfg.V0 * np.exp(-2.0 * np.maximum(z, 0.0)), ceiling), 0.0)
    kinetic = _kinetic_operator(grid.n_points - 2, grid.dz)
    below_surface = z < 0.0

    def rhs(t: float, psi: np.ndarray) -> np.ndarray:
        return -1j * (kinetic @ psi + (static * cfg.envelope(t)) * psi)

    def energy(t: float, psi: np.ndarray) -> float:
        return float(np.real(np.vdot(psi, kinetic @ psi + static * cfg.envelope(t) * psi)) * grid.dz)

    duration = t_end - state.t
    n_steps = int(math.ceil(duration / grid.time_step - 1e-9)) if duration > 0.0 else 0
    h = duration / n_steps if n_steps else 0.0

    psi = state.psi[1:-1].astype(complex)
    norm0 = float(np.sum(np.abs(psi) ** 2) * grid.dz)
    energy0 = energy(state.t, psi)
    lost = state.diagnostics.lost_fraction
    t = state.t
    for step in range(1, n_steps + 1):
        psi = rk4_step(rhs, t, psi, h)
        t = state.t + step * h
        if step % check_every == 0 or step == n_steps:
            norm = float(np.sum(np.abs(psi) ** 2) * grid.dz)
            drift = abs(norm - norm0) / norm0
            lost = max(lost, float(np.sum(np.abs(psi[below_surface]) ** 2) * grid.dz))
            if not math.isfinite(norm) or drift > MAX_NORM_DRIFT:
                raise NumericalInstabilityError(
                    f"norm drift {drift:.3e} at t={t:.6g} exceeds {MAX_NORM_DRIFT}",
                    {"t": t, "step": step, "norm": norm, "dt": h, "lost_fraction": lost},
                )
            logger.debug(f"t={t:.6g} step {step}/{n_steps} norm drift {drift:.3e}")

    full = np.zeros(grid.n_points, dtype=complex)
    full[1:-1] = psi
    norm = float(np.sum(np.abs(psi) ** 2) * grid.dz)
    energy1 = energy(t, psi)
    previous = state.diagnostics
    diagnostics = EvolutionDiagnostics(
        steps=previous.steps + n_steps,
        norm_drift=previous.norm_drift + abs(norm - norm0) / norm0,
        energy_drift=abs(energy1 - energy0) / abs(energy0) if energy0 else 0.0,
        lost_fraction=lost,
        edge_probability=0.0,
    )
    result = replace(state, psi=full, t=t, diagnostics=diagnostics)
    result = replace(result, diagnostics=replace(diagnostics, edge_probability=result.edge_probability()))
    logger.info(
        f"Evolved to t={t:.6g} in {n_steps} steps: norm drift {diagnostics.norm_drift:.2e}, "
        f"lost fraction {diagnostics.lost_fraction:.2e}"
    )
    return result


def potential_fraction(state: WavepacketState, cfg: MirrorConfig) -> float:
    """<V> / <E> of the packet; small once the packet has left the potential."""
    v = state.potential_energy(cfg)
    return v / (state.kinetic_energy() + v)


def evolve_until_clear(
    state: WavepacketState,
    cfg: MirrorConfig,
    step: float,
    threshold: float = DEFAULT_CLEAR_THRESHOLD,
    max_extra_steps: int = 40,
    ceiling_factor: float = DEFAULT_CEILING_FACTOR,
) -> WavepacketState:
    """Keep evolving in increments of step until <V>/<E> drops below threshold."""
    for _ in range(max_extra_steps):
        if potential_fraction(state, cfg) < threshold:
            return state
        logger.info(f"Packet still interacting at t={state.t:.6g}; evolving another {step:.4g}")
        state = evolve(state, cfg, state.t + step, ceiling_factor)
    return state


@dataclass(frozen=True)
class SidebandPeak:
    """
    One sideband found in a momentum spectrum.

    height is the fitted peak density over the reference carrier height;
    flux_height removes the dispersion stretch p_n / p_i; weight is the
    probability inside the +/- q/2 window; amplitude has modulus sqrt(flux_height)
    and the phase of psi(p) with free propagation removed.
    """

    order: int
    expected_momentum: float
    peak_momentum: float
    bin_momentum: float
    height: float
    flux_height: float
    weight: float
    amplitude: complex


@dataclass(frozen=True, eq=False)
class MomentumSpectrum:
    p: np.ndarray
    amplitude: np.ndarray
    t: float = 0.0
    reference_height: float = 1.0
    sidebands: Dict[int, SidebandPeak] = field(default_factory=dict)
    overlapping: bool = False

    @property
    def density(self) -> np.ndarray:
        return np.abs(self.amplitude) ** 2

    @property
    def normalized(self) -> np.ndarray:
        return self.density / self.reference_height

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    def total_probability(self) -> float:
        return float(self.density.sum() * self.dp)

    def sideband(self, n: int) -> SidebandPeak:
        """
        :raises MissingSidebandError: If order n was not found above the noise floor.
        """
        try:
            return self.sidebands[int(n)]
        except KeyError:
            raise MissingSidebandError(f"sideband n={n} not present in spectrum at t={self.t:.6g}") from None

    def peak_near(self, p_target: float, half_width: float) -> Tuple[float, float, int]:
        """
        Log-parabolic fit of the local maximum within +/- half_width of p_target.

        :return: (peak momentum, peak density, index of the maximal bin)
        """
        lo = int(np.searchsorted(self.p, p_target - half_width, side="left"))
        hi = int(np.searchsorted(self.p, p_target + half_width, side="right")) - 1
        lo, hi = max(lo, 1), min(hi, self.p.size - 2)
        if hi < lo:
            raise DomainError(f"no momentum bins near p={p_target}")
        density = self.density
        k = lo + int(np.argmax(density[lo : hi + 1]))
        y = density[k - 1 : k + 2]
        if np.any(y <= 0.0):
            return float(self.p[k]), float(density[k]), k
        y0, y1, y2 = np.log(y)
        curvature = y0 - 2.0 * y1 + y2
        if curvature >= 0.0:
            return float(self.p[k]), float(density[k]), k
        delta = 0.5 * (y0 - y2) / curvature
        return float(self.p[k] + delta * self.dp), float(math.exp(y1 - 0.25 * (y0 - y2) * delta)), k


def momentum_spectrum(
    state: WavepacketState,
    cfg: Optional[MirrorConfig] = None,
    threshold: float = DEFAULT_CLEAR_THRESHOLD,
) -> MomentumSpectrum:
    """
    psi(p) = (2 pi)^(-1/2) integral psi(z) exp(-i p z) dz, on the FFT momentum axis.

    :param cfg: When given, the packet must have left the potential (<V>/<E> < threshold).
    :raises PreconditionError: If the packet still interacts or has reached a wall.
    """
    if cfg is not None:
        fraction = potential_fraction(state, cfg)
        if fraction >= threshold:
            raise PreconditionError(f"packet still interacting at t={state.t:.6g}: <V>/<E> = {fraction:.2e}")
    edge = state.edge_probability()
    if edge > EDGE_LIMIT:
        raise PreconditionError(f"packet has reached the box walls at t={state.t:.6g} (probability {edge:.2e})")

    grid = state.grid
    p = fft.fftshift(fft.fftfreq(grid.n_points, d=grid.dz)) * 2.0 * math.pi
    transform = fft.fftshift(fft.fft(state.psi))
    amplitude = grid.dz / math.sqrt(2.0 * math.pi) * np.exp(-1j * p * grid.z_min) * transform
    return MomentumSpectrum(p=p, amplitude=amplitude, t=state.t)


def extract_sidebands(
    spectrum: MomentumSpectrum,
    P_i: float,
    omega: float,
    orders: Iterable[int],
    reference_height: Optional[float] = None,
    noise_floor: float = 1e-10,
) -> MomentumSpectrum:
    """
    Locate the sidebands n in orders at their energy-conserving momenta.

    Peaks below noise_floor times the spectrum maximum are left out.

    :return: Copy of the spectrum carrying the sideband table.
    """
    reference = reference_height if reference_height is not None else spectrum.reference_height
    q = omega / P_i
    density = spectrum.density
    floor = noise_floor * float(density.max())
    found: Dict[int, SidebandPeak] = {}
    for n in orders:
        try:
            expected = sideband_momenta_exact(P_i, q, int(n))
        except ClosedChannelError:
            logger.debug(f"Order {n} closed at P_i={P_i}, q={q}")
            continue
        half_width = 0.5 * q if q > 0.0 else 3.0 * spectrum.dp
        peak_p, peak_density, k = spectrum.peak_near(expected, half_width)
        if peak_density < floor:
            logger.info(f"Sideband n={n} below noise floor ({peak_density:.2e} < {floor:.2e})")
            continue
        window = np.abs(spectrum.p - expected) <= half_width
        height = peak_density / reference
        flux_height = height * P_i / peak_p
        phase = np.angle(spectrum.amplitude[k] * np.exp(0.5j * spectrum.p[k] ** 2 * spectrum.t))
        found[int(n)] = SidebandPeak(
            order=int(n),
            expected_momentum=expected,
            peak_momentum=peak_p,
            bin_momentum=float(spectrum.p[k]),
            height=height,
            flux_height=flux_height,
            weight=float(density[window].sum() * spectrum.dp),
            amplitude=complex(math.sqrt(flux_height) * np.exp(1j * phase)),
        )
    return replace(spectrum, sidebands=found, reference_height=reference)


@dataclass(frozen=True)
class PacketParams:
    """Incident packet in momentum space: carrier P_i and standard deviation dp."""

    P_i: float
    dp: float

    @classmethod
    def from_position_width(cls, P_i: float, dz_i: float) -> "PacketParams":
        return cls(P_i=P_i, dp=1.0 / (2.0 * dz_i))

    def amplitude(self, p: np.ndarray) -> np.ndarray:
        return (2.0 * math.pi * self.dp**2) ** -0.25 * np.exp(-((p - self.P_i) ** 2) / (4.0 * self.dp**2))

    @property
    def peak_density(self) -> float:
        return 1.0 / math.sqrt(2.0 * math.pi * self.dp**2)


def predicted_spectrum(
    packet: PacketParams,
    spectrum: SidebandSpectrum,
    momenta: Optional[np.ndarray] = None,
    cutoff: float = 1e-16,
    rule: MomentumRule = MomentumRule.LINEARIZED,
) -> MomentumSpectrum:
    """
    Phase-modulation prediction of the reflected momentum distribution.

    With the linearised rule order n is the incident packet shifted by n q,
    weighted by a_n evaluated at p' = p - n q; the modulation index uses the
    carrier spacing q throughout, so orders +n and -n peak at equal heights.

    With the exact rule p' = sqrt(p^2 - 2 n omega), a_n uses the local spacing
    omega / p' and the density carries the stretch p / p'.

    Propagation phases are left out, so only well separated orders are meaningful.

    :param packet: Incident packet.
    :param spectrum: Sideband amplitudes at the carrier momentum.
    :param momenta: Momentum axis; defaults to a fine axis spanning all stored orders.
    :param rule: How an order maps incident momenta onto final ones.
    """
    rule = MomentumRule(rule)
    P_i = spectrum.carrier
    omega = spectrum.spacing * P_i
    epsilon = spectrum.u / (P_i * beta(spectrum.spacing)) if spectrum.u > 0.0 else 0.0
    if momenta is None:
        momenta_span = spectrum.momenta(rule)
        lo = np.nanmin(momenta_span) - 10.0 * packet.dp
        hi = np.nanmax(momenta_span) + 10.0 * packet.dp
        momenta = np.linspace(lo, hi, 8192)
    p = np.asarray(momenta, dtype=float)
    amplitude = np.zeros(p.size, dtype=complex)
    peak = (2.0 * math.pi * packet.dp**2) ** -0.25
    linear = rule is MomentumRule.LINEARIZED

    for n in spectrum.orders:
        n = int(n)
        if epsilon == 0.0 and n != 0:
            continue
        if linear:
            p_in = p - n * spectrum.spacing
            valid = p_in > 0.0
        else:
            discriminant = p * p - 2.0 * n * omega
            valid = (discriminant > 0.0) & (p > 0.0)
            p_in = np.sqrt(np.where(valid, discriminant, 1.0))
        if not valid.any():
            continue
        envelope = np.where(valid, packet.amplitude(np.where(valid, p_in, P_i)), 0.0)
        keep = np.nonzero(envelope > cutoff * peak)[0]
        for k in keep:
            p_k = p_in[k]
            q_k = spectrum.spacing if linear else omega / p_k
            u_k = epsilon * p_k * beta(q_k)
            xi_k = spectrum.xi_eff + math.log(P_i / p_k)
            a_n = bessel_j(n, u_k) * np.exp(-1j * n * q_k * xi_k + 1j * n * spectrum.phi)
            stretch = 1.0 if linear else math.sqrt(p[k] / p_k)
            amplitude[k] += a_n * envelope[k] * stretch

    q = spectrum.spacing
    overlapping = q < 6.0 * packet.dp
    if overlapping:
        logger.warning(f"Sideband spacing q={q:.3g} is not large against the packet width {packet.dp:.3g}")
    return MomentumSpectrum(
        p=p,
        amplitude=amplitude,
        reference_height=packet.peak_density,
        overlapping=overlapping,
    )


class BounceSetup(BaseModel):
    """
    One wavepacket bounce: incident packet, mirror modulation and numerics.

    V0 is v0_factor times the carrier energy, putting the turning point at
    z = ln(v0_factor) / 2.

    clearance and clear_step are in units of tau. After the fixed clearance the
    packet is stepped on in increments of clear_step until <V>/<E> falls below
    clear_threshold, so the spectrum is taken as soon as the packet has left the
    potential and before it reaches the wall at z_max.
    """

    model_config = ConfigDict(frozen=True)

    P_i: Annotated[float, Field(gt=0.0)] = 100.0
    Q: Annotated[float, Field(ge=0.0)] = 4.2
    epsilon: Annotated[float, Field(ge=0.0, le=1.0)] = 1.0
    phi: float = 0.0
    z_i: float = 13.0
    dz_i: Annotated[float, Field(gt=0.0)] = 2.0
    grid: GridSpec = GridSpec()
    v0_factor: Annotated[float, Field(gt=0.0)] = DEFAULT_V0_FACTOR
    clearance: Annotated[float, Field(ge=0.0)] = 1.0
    clear_step: Annotated[float, Field(gt=0.0)] = DEFAULT_CLEAR_STEP
    orders: Tuple[int, ...] = (-1, 0, 1)
    ceiling_factor: Annotated[float, Field(gt=1.0)] = DEFAULT_CEILING_FACTOR
    clear_threshold: Annotated[float, Field(gt=0.0)] = DEFAULT_CLEAR_THRESHOLD

    def state(self) -> ScaledState:
        return ScaledState.from_scaled(self.P_i, self.Q, V0=self.V0)

    @property
    def V0(self) -> float:
        return self.v0_factor * 0.5 * self.P_i**2

    def mirror(self) -> MirrorConfig:
        return MirrorConfig.for_state(self.state(), self.epsilon, self.phi, self.V0)

    def packet(self) -> PacketParams:
        return PacketParams.from_position_width(self.P_i, self.dz_i)

    def t_end(self) -> float:
        """Round trip of the ideal mirror at xi_eff plus the clearance, in units of tau."""
        state = self.state()
        return 2.0 * (self.z_i - state.xi_eff) / self.P_i + self.clearance * state.tau

    def bounce_phase(self) -> float:
        """omega t0 - phi for the unmodulated turning time t0 of the packet centre."""
        trajectory = ClassicalTrajectory(t0=0.0, E_i=0.5 * self.P_i**2, V0=self.V0)
        return self.state().omega * trajectory.time_to_turn(self.z_i) - self.phi

    def p_max(self) -> float:
        top = max(max(self.orders), 0)
        return sideband_momenta_exact(self.P_i, self.Q, top) + 5.0 * self.packet().dp


@dataclass(frozen=True, eq=False)
class BounceResult:
    setup: BounceSetup
    final_state: WavepacketState
    spectrum: MomentumSpectrum
    predicted: MomentumSpectrum
    bounce_phase: float

    @property
    def diagnostics(self) -> EvolutionDiagnostics:
        return self.final_state.diagnostics

    def amplitudes(self, orders: Iterable[int] = (-1, 0, 1)) -> Dict[int, complex]:
        return {int(n): self.spectrum.sideband(n).amplitude for n in orders}


def run_bounce(setup: BounceSetup) -> BounceResult:
    """
    Simulate one bounce and measure the reflected sideband spectrum.

    The carrier reference height is the incident packet's peak, which elastic
    reflection carries unchanged from -P_i to +P_i.
    """
    Validator().validate_grid(setup.grid, setup.p_max())
    cfg = setup.mirror()
    state0 = init_gaussian(setup.z_i, setup.dz_i, setup.P_i, setup.grid, cfg)
    incident = momentum_spectrum(state0)
    _, reference_height, _ = incident.peak_near(-setup.P_i, 3.0 * setup.packet().dp)

    step = setup.clear_step / setup.P_i
    logger.info(f"Bounce P_i={setup.P_i}, Q={setup.Q}, eps={setup.epsilon}: evolving to t={setup.t_end():.6g}")
    final = evolve(state0, cfg, setup.t_end(), setup.ceiling_factor)
    final = evolve_until_clear(final, cfg, step, setup.clear_threshold, ceiling_factor=setup.ceiling_factor)

    spectrum = momentum_spectrum(final, cfg, setup.clear_threshold)
    spectrum = extract_sidebands(spectrum, setup.P_i, cfg.omega, setup.orders, reference_height)
    predicted = predicted_spectrum(setup.packet(), sideband_amplitudes(setup.state(), cfg), spectrum.p)
    return BounceResult(
        setup=setup,
        final_state=final,
        spectrum=spectrum,
        predicted=predicted,
        bounce_phase=setup.bounce_phase(),
    )
