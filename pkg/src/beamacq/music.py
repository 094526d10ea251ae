"""Stage I: delay estimation from the observation block via MUSIC.

The sample covariance C = R R^H is eigendecomposed; the noise subspace
(eigenvectors past the P largest eigenvalues) defines the pseudo-spectrum

    P_MU(tau) = || b(tau)^H U_N ||^2,   0 <= tau < T,

whose P smallest well-separated local minima locate the delays.  The grid
search runs at step T / (grid_oversampling * N_s) and each minimum is
refined by parabolic interpolation of log P_MU.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .numerics import hermitian_eig

DEFAULT_GRID_OVERSAMPLING = 16


class SubspaceDegenerate(RuntimeError):
    """Fewer local minima than targets on the pseudo-spectrum grid."""


@dataclass(frozen=True)
class DelayEstimate:
    """Sorted delay estimates in [0, T) plus grid diagnostics."""

    delays_s: np.ndarray
    pseudo_spectrum: np.ndarray
    grid_taus: np.ndarray
    noise_subspace_dim: int
    eigenvalues: np.ndarray
    used_fallback: bool


def sample_covariance(observations: np.ndarray) -> np.ndarray:
    """Unnormalized sample covariance C = R R^H (Hermitian PSD)."""
    r = np.asarray(observations, dtype=np.complex128)
    return r @ r.conj().T


def pseudo_spectrum(noise_subspace: np.ndarray, tau, symbol_duration_s: float,
                    num_subcarriers: int):
    """|| b(tau)^H U_N ||^2 for scalar or array tau; values in [0, N_s]."""
    taus = np.atleast_1d(np.asarray(tau, dtype=float))
    k = np.arange(num_subcarriers)
    b = np.exp(-2j * np.pi * np.outer(taus, k) / symbol_duration_s)
    vals = np.sum(np.abs(b.conj() @ noise_subspace) ** 2, axis=1)
    return vals if np.ndim(tau) else float(vals[0])


def _refine_parabolic(grid_vals: np.ndarray, idx: int, step: float) -> float:
    """Vertex of the parabola through P_MU at the 3-point neighborhood.

    Near a true delay the noiseless pseudo-spectrum is quadratic in tau,
    so fitting the raw values recovers the minimum exactly; fitting log
    values would bias the vertex by a sizable fraction of a grid step.
    """
    n = len(grid_vals)
    y0 = grid_vals[(idx - 1) % n]
    y1 = grid_vals[idx]
    y2 = grid_vals[(idx + 1) % n]
    denom = y0 - 2.0 * y1 + y2
    if denom <= 0:
        return idx * step
    delta = 0.5 * (y0 - y2) / denom
    if abs(delta) > 1.0:
        delta = 0.0
    return (idx + delta) * step


def _select_minima(pmu: np.ndarray, num_targets: int, min_sep_bins: int) -> list[int]:
    left = np.roll(pmu, 1)
    right = np.roll(pmu, -1)
    candidates = np.where((pmu < left) & (pmu < right))[0]
    candidates = candidates[np.argsort(pmu[candidates], kind="stable")]
    n = len(pmu)
    selected: list[int] = []
    for c in candidates:
        dist_ok = all(min(abs(int(c) - s), n - abs(int(c) - s)) >= min_sep_bins
                      for s in selected)
        if dist_ok:
            selected.append(int(c))
        if len(selected) == num_targets:
            return selected
    raise SubspaceDegenerate(
        f"only {len(selected)} separated local minima for {num_targets} targets")


def estimate_delays(observations: np.ndarray, num_targets: int, symbol_duration_s: float,
                    grid_oversampling: int = DEFAULT_GRID_OVERSAMPLING) -> DelayEstimate:
    """Run the full Stage-I chain: covariance, eigenspaces, grid search, refinement.

    Requires at least num_targets snapshots (columns of R).  When fewer
    than num_targets separated local minima exist, falls back to the P
    smallest grid values and flags the result.
    """
    r = np.asarray(observations, dtype=np.complex128)
    n_s, n_slots = r.shape
    p = num_targets
    if n_slots < p:
        raise ValueError(f"need at least {p} slots for a rank-{p} signal subspace, got {n_slots}")
    eig = hermitian_eig(sample_covariance(r))
    noise_basis = eig.eigenvectors[:, p:]

    n_grid = grid_oversampling * n_s
    step = symbol_duration_s / n_grid
    grid_taus = np.arange(n_grid) * step
    pmu = pseudo_spectrum(noise_basis, grid_taus, symbol_duration_s, n_s)

    min_sep_bins = max(1, n_grid // n_s)  # one delay-resolution bin T / N_s
    used_fallback = False
    try:
        picks = _select_minima(pmu, p, min_sep_bins)
    except SubspaceDegenerate:
        used_fallback = True
        picks = list(np.argsort(pmu, kind="stable")[:p])

    delays = sorted(_refine_parabolic(pmu, idx, step) % symbol_duration_s for idx in picks)
    return DelayEstimate(delays_s=np.array(delays), pseudo_spectrum=pmu,
                         grid_taus=grid_taus, noise_subspace_dim=n_s - p,
                         eigenvalues=eig.eigenvalues, used_fallback=used_fallback)


class MusicDelayEstimator(BaseEstimator):
    """Estimator wrapper around estimate_delays.

    Parameters
    ----------
    num_targets : known model order P.
    symbol_duration_s : OFDM symbol duration T; delays live in [0, T).
    grid_oversampling : grid step is T / (grid_oversampling * N_s).

    After fit(R): ``delays_`` (sorted, in [0, T)), ``pseudo_spectrum_``,
    ``grid_taus_``, ``eigenvalues_``, ``noise_subspace_dim_``,
    ``used_fallback_``.
    """

    def __init__(self, num_targets: int = 3, symbol_duration_s: float = 36 / 160e6,
                 grid_oversampling: int = DEFAULT_GRID_OVERSAMPLING):
        self.num_targets = num_targets
        self.symbol_duration_s = symbol_duration_s
        self.grid_oversampling = grid_oversampling

    def fit(self, observations: np.ndarray, y=None):
        est = estimate_delays(observations, self.num_targets, self.symbol_duration_s,
                              self.grid_oversampling)
        self.delays_ = est.delays_s
        self.pseudo_spectrum_ = est.pseudo_spectrum
        self.grid_taus_ = est.grid_taus
        self.eigenvalues_ = est.eigenvalues
        self.noise_subspace_dim_ = est.noise_subspace_dim
        self.used_fallback_ = est.used_fallback
        return self
