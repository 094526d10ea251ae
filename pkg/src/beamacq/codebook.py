"""Flat-top beamforming codebook synthesis and angle-to-beam mapping.

The codebook partitions the sin-angle range into N_b equal sectors and
synthesizes one unit-norm beam per sector with approximately constant gain
inside its sector and low gain elsewhere.  Per beam, a least-squares fit of
the complex response f^H a(u) against the sector indicator mask is solved
on an oversampled sin-angle grid; the collection is then made exactly
orthonormal by symmetric (Loewdin) orthogonalization.

The crossing of adjacent beams sits on the shared sector edge by symmetry,
so the maximum-gain beam and the covering sector agree except on a
measure-zero set; the transition width around each edge is limited by the
array aperture (about 1/M in sin space) and cannot be designed away.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .scene import steering_vector

GRAM_OFFDIAG_MAX = 0.05
CENTER_DOMINANCE_MIN = 10.0
DEFAULT_OVERSAMPLING = 16
DEFAULT_RIDGE = 1e-6


class SynthesisFailure(RuntimeError):
    """Synthesized codebook misses an orthogonality or coverage target."""


class OutOfRange(ValueError):
    """Angle outside the codebook's AoA range."""


@dataclass(frozen=True)
class Codebook:
    """Beam matrix (num_antennas x num_beams) plus the sector layout.

    sector_edges holds num_beams + 1 sorted sin-angle values; sector i is
    (edges[i], edges[i+1]] with the lower sector winning shared edges, and
    sector 0 also containing its left edge.
    """

    beams: np.ndarray
    sector_edges: np.ndarray

    @property
    def num_antennas(self) -> int:
        return self.beams.shape[0]

    @property
    def num_beams(self) -> int:
        return self.beams.shape[1]

    @property
    def sector_centers(self) -> np.ndarray:
        return 0.5 * (self.sector_edges[:-1] + self.sector_edges[1:])


def _steering_grid(sin_grid: np.ndarray, num_antennas: int) -> np.ndarray:
    i = np.arange(num_antennas)
    return np.exp(1j * np.pi * np.outer(i, sin_grid))


def build_codebook(num_antennas: int, num_beams: int,
                   aoa_range_rad: tuple[float, float] = (-math.pi / 2, math.pi / 2),
                   oversampling: int = DEFAULT_OVERSAMPLING,
                   ridge: float = DEFAULT_RIDGE) -> Codebook:
    """Synthesize the flat-top codebook over the given AoA range.

    Raises SynthesisFailure if the Gram off-diagonal bound (0.05) or the
    sector-center dominance target (10x over every other beam) is not met.
    """
    if num_beams > num_antennas:
        raise ValueError("num_beams must not exceed num_antennas")
    s_lo, s_hi = math.sin(aoa_range_rad[0]), math.sin(aoa_range_rad[1])
    edges = np.linspace(s_lo, s_hi, num_beams + 1)

    # 16 grid points per sector, extended over the full visible sin space so
    # response outside the AoA range is constrained to zero as well.
    step = (s_hi - s_lo) / (oversampling * num_beams)
    n_grid = int(round(2.0 / step))
    grid = -1.0 + (np.arange(n_grid) + 0.5) * (2.0 / n_grid)
    a_grid = _steering_grid(grid, num_antennas)

    lhs = a_grid @ a_grid.conj().T + ridge * n_grid * np.eye(num_antennas)
    masks = np.zeros((n_grid, num_beams))
    for i in range(num_beams):
        masks[(grid >= edges[i]) & (grid < edges[i + 1]), i] = 1.0
    f_raw = np.linalg.solve(lhs, a_grid @ masks)

    # Loewdin orthogonalization: F <- F (F^H F)^(-1/2), then renormalize.
    gram = f_raw.conj().T @ f_raw
    w, v = np.linalg.eigh(gram)
    if w[0] <= 0:
        raise SynthesisFailure("raw beam set is rank deficient")
    f = f_raw @ (v @ np.diag(1.0 / np.sqrt(w)) @ v.conj().T)
    f /= np.linalg.norm(f, axis=0, keepdims=True)

    cb = Codebook(beams=f, sector_edges=edges)
    _validate(cb)
    return cb


def _validate(cb: Codebook) -> None:
    gram = cb.beams.conj().T @ cb.beams
    off = np.abs(gram - np.eye(cb.num_beams)).max()
    if off > GRAM_OFFDIAG_MAX:
        raise SynthesisFailure(f"Gram off-diagonal {off:.3g} > {GRAM_OFFDIAG_MAX}")
    for j, center in enumerate(cb.sector_centers):
        q = beamspace_vector(cb, math.asin(float(center)))
        top = int(np.argmax(q))
        rest = np.delete(q, top)
        if top != j or q[top] < CENTER_DOMINANCE_MIN * rest.max():
            raise SynthesisFailure(
                f"sector {j} center not covered with {CENTER_DOMINANCE_MIN}x dominance")


def dft_codebook(num_antennas: int) -> Codebook:
    """Orthonormal DFT codebook for the N_b = M case (unit Gram)."""
    m = num_antennas
    edges = np.linspace(-1.0, 1.0, m + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    beams = _steering_grid(centers, m) / math.sqrt(m)
    return Codebook(beams=beams, sector_edges=edges)


def covering_beam(cb: Codebook, aoa_rad: float) -> int:
    """Index of the sector containing sin(aoa); ground truth for metrics.

    Shared edges go to the lower-index sector.
    """
    s = math.sin(aoa_rad)
    edges = cb.sector_edges
    if s < edges[0] or s > edges[-1]:
        raise OutOfRange(f"sin(aoa)={s:.4f} outside [{edges[0]:.4f}, {edges[-1]:.4f}]")
    idx = int(np.searchsorted(edges, s, side="left")) - 1
    return min(max(idx, 0), cb.num_beams - 1)


def beamspace_vector(cb: Codebook, aoa_rad: float) -> np.ndarray:
    """Two-way beam gains q with q[i] = |f_i^H a(aoa)|^2 (real, >= 0)."""
    a = steering_vector(aoa_rad, cb.num_antennas)
    return np.abs(cb.beams.conj().T @ a) ** 2


def dump_csv(cb: Codebook, gram_path, profile_path, profile_points: int = 512) -> None:
    """Write the Gram matrix and per-beam gain profiles for inspection."""
    gram = cb.beams.conj().T @ cb.beams
    with open(gram_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "abs_gram"])
        for i in range(cb.num_beams):
            for j in range(cb.num_beams):
                writer.writerow([i, j, repr(float(abs(gram[i, j])))])
    s_lo, s_hi = cb.sector_edges[0], cb.sector_edges[-1]
    sin_grid = np.linspace(s_lo + 1e-9, s_hi - 1e-9, profile_points)
    gains = np.abs(cb.beams.conj().T @ _steering_grid(sin_grid, cb.num_antennas)) ** 2
    with open(profile_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["sin_angle"] + [f"beam_{i}" for i in range(cb.num_beams)])
        for g, col in zip(sin_grid, gains.T):
            writer.writerow([repr(float(g))] + [repr(float(x)) for x in col])
