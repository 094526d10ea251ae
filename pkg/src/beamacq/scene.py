"""Target geometry and channel sampling for the backscatter model.

Each target is a point scatterer described by its distance, angle of
arrival, round-trip delay and a Rayleigh-faded complex gain whose variance
follows the radar equation:

    C_h = lambda^2 * sigma_rcs / ((4 pi)^3 * d^4)

Angles live in a uniform linear array's sin-angle space; delays alias
modulo the OFDM symbol duration T = N_s / BW (see PhysicalConfig docs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

C_LIGHT = 299_792_458.0

# Geometry resampling budget before giving up on a separable scene.
MAX_GEOMETRY_ATTEMPTS = 1000


class SeparabilityFailure(RuntimeError):
    """Could not draw a separable scene within the resampling budget."""


def dbm_per_hz_to_w_per_hz(x_dbm: float) -> float:
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def dbsm_to_sqm(x_dbsm: float) -> float:
    return 10.0 ** (x_dbsm / 10.0)


@dataclass(frozen=True)
class PhysicalConfig:
    """Physical-layer parameters of the probing system.

    Defaults reproduce the reference configuration: 128-antenna ULA,
    36 beams, 36 subcarriers over 160 MHz at 10 GHz carrier, 3 targets
    uniformly placed in [10, 50] m with 20 dBsm cross section, and
    -174 dBm/Hz noise density.

    The OFDM symbol duration is fixed to T = N_s / BW (inverse subcarrier
    spacing).  True round-trip delays of far targets exceed T and alias
    modulo T; delays are estimated and scored modulo T throughout.
    """

    carrier_freq_hz: float = 10e9
    bandwidth_hz: float = 160e6
    num_subcarriers: int = 36
    num_antennas: int = 128
    num_beams: int = 36
    num_targets: int = 3
    noise_psd_w_per_hz: float = dbm_per_hz_to_w_per_hz(-174.0)
    tx_power_w: float = 1.0
    distance_range_m: tuple[float, float] = (10.0, 50.0)
    rcs_sqm: float = dbsm_to_sqm(20.0)
    aoa_range_rad: tuple[float, float] = (-math.pi / 2, math.pi / 2)

    def __post_init__(self):
        for name in ("carrier_freq_hz", "bandwidth_hz", "num_subcarriers", "num_antennas",
                     "num_beams", "num_targets", "noise_psd_w_per_hz", "tx_power_w", "rcs_sqm"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        lo, hi = self.distance_range_m
        if not 0 < lo < hi:
            raise ValueError("distance_range_m must satisfy 0 < low < high")
        alo, ahi = self.aoa_range_rad
        if not (-math.pi / 2 <= alo < ahi <= math.pi / 2):
            raise ValueError("aoa_range_rad must be an increasing range within [-pi/2, pi/2]")
        if self.num_beams > self.num_antennas:
            raise ValueError("num_beams must not exceed num_antennas")

    @property
    def wavelength_m(self) -> float:
        return C_LIGHT / self.carrier_freq_hz

    @property
    def subcarrier_spacing_hz(self) -> float:
        return self.bandwidth_hz / self.num_subcarriers

    @property
    def symbol_duration_s(self) -> float:
        return self.num_subcarriers / self.bandwidth_hz


@dataclass(frozen=True)
class Target:
    distance_m: float
    aoa_rad: float
    delay_s: float
    gain_variance: float
    gain: complex | None = None


@dataclass(frozen=True)
class Scene:
    targets: tuple[Target, ...]
    geometry_id: int = 0
    realization_id: int = 0

    @property
    def distances(self) -> np.ndarray:
        return np.array([t.distance_m for t in self.targets])

    @property
    def aoas(self) -> np.ndarray:
        return np.array([t.aoa_rad for t in self.targets])

    @property
    def delays(self) -> np.ndarray:
        return np.array([t.delay_s for t in self.targets])

    @property
    def gains(self) -> np.ndarray:
        if any(t.gain is None for t in self.targets):
            raise ValueError("scene has no channel realization; call sample_realization first")
        return np.array([t.gain for t in self.targets], dtype=np.complex128)

    @property
    def gain_variances(self) -> np.ndarray:
        return np.array([t.gain_variance for t in self.targets])


def gain_variance(config: PhysicalConfig, distance_m: float) -> float:
    """Radar-equation variance of the two-way channel gain at distance d."""
    if distance_m <= 0:
        raise ValueError("distance must be positive")
    lam = config.wavelength_m
    return lam**2 * config.rcs_sqm / ((4.0 * math.pi) ** 3 * distance_m**4)


def _separable(sin_aoas: np.ndarray, delays: np.ndarray, config: PhysicalConfig) -> bool:
    # Distinct codebook beams: sin-angle gaps of at least one sector width.
    # Distinct delay bins: circular (mod T) gaps of at least T / N_s.
    t_sym = config.symbol_duration_s
    bin_width = t_sym / config.num_subcarriers
    sector = (2.0) / config.num_beams  # sin-space sector width over [-1, 1)
    p = len(sin_aoas)
    for i in range(p):
        for j in range(i + 1, p):
            if abs(sin_aoas[i] - sin_aoas[j]) < sector:
                return False
            d = abs(delays[i] - delays[j]) % t_sym
            if min(d, t_sym - d) < bin_width:
                return False
    return True


def sample_geometry(config: PhysicalConfig, rng: np.random.Generator,
                    geometry_id: int = 0) -> Scene:
    """Draw target distances and AoAs until the separability constraint holds.

    Distances are Unif[low, high], AoAs Unif over the configured range.
    Gains are left unset; use sample_realization to draw them.
    """
    lo, hi = config.distance_range_m
    alo, ahi = config.aoa_range_rad
    p = config.num_targets
    for _ in range(MAX_GEOMETRY_ATTEMPTS):
        d = rng.uniform(lo, hi, p)
        aoa = rng.uniform(alo, ahi, p)
        tau = 2.0 * d / C_LIGHT
        if p == 1 or _separable(np.sin(aoa), tau, config):
            targets = tuple(
                Target(distance_m=float(d[k]), aoa_rad=float(aoa[k]), delay_s=float(tau[k]),
                       gain_variance=gain_variance(config, float(d[k])))
                for k in range(p)
            )
            return Scene(targets=targets, geometry_id=geometry_id)
    raise SeparabilityFailure(
        f"no separable geometry in {MAX_GEOMETRY_ATTEMPTS} attempts for P={p}")


def sample_realization(scene: Scene, rng: np.random.Generator,
                       realization_id: int = 0) -> Scene:
    """Draw circularly-symmetric complex Gaussian gains h_p ~ CN(0, C_h)."""
    targets = []
    for t in scene.targets:
        sigma = math.sqrt(t.gain_variance / 2.0)
        g = complex(rng.normal(0.0, sigma), rng.normal(0.0, sigma))
        targets.append(replace(t, gain=g))
    return Scene(targets=tuple(targets), geometry_id=scene.geometry_id,
                 realization_id=realization_id)


def steering_vector(aoa_rad: float, num_antennas: int) -> np.ndarray:
    """ULA array response a(phi) with [a]_i = exp(j pi i sin(phi)), i from 0."""
    if num_antennas < 1:
        raise ValueError("num_antennas must be >= 1")
    i = np.arange(num_antennas)
    return np.exp(1j * np.pi * i * math.sin(aoa_rad))


def delay_steering_vector(delay_s: float, num_subcarriers: int,
                          symbol_duration_s: float) -> np.ndarray:
    """Frequency-domain delay response b(tau), T-periodic in tau.

    [b]_k = exp(-j 2 pi k tau / T) for subcarrier offsets k = 0..N_s-1.
    """
    if num_subcarriers < 1:
        raise ValueError("num_subcarriers must be >= 1")
    if symbol_duration_s <= 0:
        raise ValueError("symbol duration must be positive")
    k = np.arange(num_subcarriers)
    return np.exp(-2j * np.pi * k * delay_s / symbol_duration_s)
