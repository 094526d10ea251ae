"""Beam probing strategies, radar response assembly and noisy observations.

The probing block over L time slots is R = sqrt(P_tx) T W + Z where T is
the N_s x N_b radar response matrix, W the nonnegative N_b x L beam
scheduling matrix (entries are squared beam weights |w_{l,i}|^2) and Z
i.i.d. complex Gaussian noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codebook import Codebook, beamspace_vector
from .scene import PhysicalConfig, Scene, delay_steering_vector

STRATEGIES = ("sweep", "random")


@dataclass(frozen=True)
class BeamSchedule:
    """Beam weight matrix W (num_beams x num_slots); entries >= 0.

    sweep: one-hot columns cycling through the beams (column l probes beam
    l mod N_b, restarting from beam 0 when L exceeds N_b).
    random: entries are (1/N_b) * g^2 with g standard normal, so each
    column sums to 1 in expectation.
    """

    weights: np.ndarray
    strategy: str

    @property
    def num_beams(self) -> int:
        return self.weights.shape[0]

    @property
    def num_slots(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class RadarResponse:
    """Factored radar response: delay responses B, beamspace gains G, T = B G^T.

    B is N_s x P (delay steering columns, delays taken modulo T), G is
    N_b x P with column p equal to h_p * q_p, and T is the N_s x N_b
    response seen through the codebook.
    """

    delay_matrix: np.ndarray
    beam_gains: np.ndarray
    response: np.ndarray


@dataclass(frozen=True)
class ObservationBlock:
    observations: np.ndarray
    noise_variance_per_sample: float
    response: RadarResponse
    scene: Scene
    schedule: BeamSchedule


def make_schedule(strategy: str, num_beams: int, num_slots: int,
                  rng: np.random.Generator | None = None) -> BeamSchedule:
    """Build the probing schedule for one block of num_slots OFDM symbols."""
    if num_slots < 1:
        raise ValueError("num_slots must be >= 1")
    if strategy == "sweep":
        w = np.zeros((num_beams, num_slots))
        w[np.arange(num_slots) % num_beams, np.arange(num_slots)] = 1.0
    elif strategy == "random":
        if rng is None:
            raise ValueError("random strategy needs an RNG")
        w = rng.standard_normal((num_beams, num_slots)) ** 2 / num_beams
    else:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    return BeamSchedule(weights=w, strategy=strategy)


def radar_response(scene: Scene, cb: Codebook, num_subcarriers: int,
                   symbol_duration_s: float) -> RadarResponse:
    """Assemble B, G and T = sum_p h_p b(tau_p mod T) q_p^T for the scene."""
    gains = scene.gains  # raises if no realization yet
    b_cols, g_cols = [], []
    for k, target in enumerate(scene.targets):
        tau = target.delay_s % symbol_duration_s
        b_cols.append(delay_steering_vector(tau, num_subcarriers, symbol_duration_s))
        g_cols.append(gains[k] * beamspace_vector(cb, target.aoa_rad))
    b_mat = np.column_stack(b_cols)
    g_mat = np.column_stack(g_cols)
    return RadarResponse(delay_matrix=b_mat, beam_gains=g_mat, response=b_mat @ g_mat.T)


def noise_variance(config: PhysicalConfig) -> float:
    """Per-subcarrier complex noise power: N_0 (W/Hz) times Delta_f = BW/N_s."""
    return config.noise_psd_w_per_hz * config.subcarrier_spacing_hz


def observe(response: RadarResponse, schedule: BeamSchedule, noise_var: float,
            tx_power: float, rng: np.random.Generator, scene: Scene) -> ObservationBlock:
    """Synthesize R = sqrt(tx_power) T W + Z with CN(0, noise_var) entries."""
    t = response.response
    w = schedule.weights
    if t.shape[1] != w.shape[0]:
        raise ValueError(f"response has {t.shape[1]} beams, schedule {w.shape[0]}")
    r = math.sqrt(tx_power) * (t @ w)
    if noise_var > 0:
        sigma = math.sqrt(noise_var / 2.0)
        z = rng.normal(0.0, sigma, r.shape) + 1j * rng.normal(0.0, sigma, r.shape)
        r = r + z
    return ObservationBlock(observations=r, noise_variance_per_sample=noise_var,
                            response=response, scene=scene, schedule=schedule)


def observe_via_pilots(response: RadarResponse, schedule: BeamSchedule, noise_var: float,
                       tx_power: float, rng: np.random.Generator,
                       scene: Scene) -> ObservationBlock:
    """Pilot-division path: draw QPSK pilots x, form y = sqrt(P) T W x + n, return y / x.

    Statistically identical to observe() because |x| = 1; kept as an
    independent synthesis route for validation.
    """
    t = response.response
    w = schedule.weights
    signal = math.sqrt(tx_power) * (t @ w)
    pilots = np.exp(1j * (np.pi / 2) * rng.integers(0, 4, signal.shape) + 1j * np.pi / 4)
    y = signal * pilots
    if noise_var > 0:
        sigma = math.sqrt(noise_var / 2.0)
        y = y + rng.normal(0.0, sigma, y.shape) + 1j * rng.normal(0.0, sigma, y.shape)
    return ObservationBlock(observations=y / pilots, noise_variance_per_sample=noise_var,
                            response=response, scene=scene, schedule=schedule)
