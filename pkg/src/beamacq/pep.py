"""Pairwise-error-probability analysis of beamspace confusions.

For genie delays, stacking the noiseless observation over slots gives
vec(R) = D(q) h + z where column p of D(q) holds (q_p^T w_l) b(tau_p)
blocks.  Confusing the true beamspace vectors q with a distorted set
q_hat is governed by the squared beamspace difference matrix

    P(q, q_hat) = Lh^(1/2) D(e)^H D(e) Lh^(1/2),   e_p = q_p - q_hat_p,

with Lh the diagonal of gain variances (D is linear in q, so
D(q) - D(q_hat) = D(e)).  Its rank sets the error exponent and the
geometric mean of its nonzero eigenvalues the coding gain; averaging the
Chernoff bound over the normalized Rayleigh gains yields

    PEP <= prod_p 1 / (lambda_p / (2 N_0) + 1).

The published closed form above corresponds to the paper-stated gain pdf
|h| exp(-|h|^2 / 2) (second moment 2).  Under a unit-second-moment
convention the factor is 1 / (lambda_p / (4 N_0) + 1); both are exposed
via ``variance_convention``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .codebook import Codebook, beamspace_vector, covering_beam
from .numerics import hermitian_eig
from .scene import PhysicalConfig, delay_steering_vector, sample_geometry
from .signal import BeamSchedule, make_schedule

DEFAULT_RANK_REL_TOL = 1e-8
VARIANCE_CONVENTIONS = ("paper", "unit")

PEP_CSV_HEADER = ["strategy", "L", "instance", "distortion", "rank", "geomean",
                  "bound_product"]


class ShapeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class PepInstance:
    """One (delays, schedule, gain variances, q true/distorted) evaluation point."""

    delays_s: np.ndarray
    schedule: BeamSchedule
    gain_variances: np.ndarray
    q_true: tuple[np.ndarray, ...]
    q_hat: tuple[np.ndarray, ...]

    def __post_init__(self):
        if np.any(np.asarray(self.gain_variances) <= 0):
            raise ValueError("gain variances must be positive")


@dataclass(frozen=True)
class PepReport:
    eigenvalues: np.ndarray
    rank: int
    geomean_nonzero: float | None
    bound_product: float
    bound_exponent: float | None


def stack_dictionary(delays_s: np.ndarray, schedule_weights: np.ndarray,
                     q_list, num_subcarriers: int,
                     symbol_duration_s: float) -> np.ndarray:
    """(L N_s) x P stacked model: rows of slot l hold (q_p^T w_l) b(tau_p)."""
    delays = np.asarray(delays_s, dtype=float)
    w = np.asarray(schedule_weights, dtype=float)
    q = np.column_stack([np.asarray(v, dtype=float) for v in q_list])  # N_b x P
    if q.shape[0] != w.shape[0]:
        raise ShapeMismatch(f"q vectors have {q.shape[0]} beams, schedule {w.shape[0]}")
    if len(delays) != q.shape[1]:
        raise ShapeMismatch(f"{len(delays)} delays vs {q.shape[1]} beamspace vectors")
    b = np.column_stack([delay_steering_vector(tau, num_subcarriers, symbol_duration_s)
                         for tau in delays])  # N_s x P
    slot_gains = q.T @ w  # P x L
    # block row l, column p = slot_gains[p, l] * b[:, p]
    d = np.einsum("kp,pl->lkp", b, slot_gains)
    return d.reshape(w.shape[1] * num_subcarriers, len(delays))


def squared_difference_matrix(instance: PepInstance, num_subcarriers: int,
                              symbol_duration_s: float) -> np.ndarray:
    """Hermitian PSD P x P matrix Lh^(1/2) D(e)^H D(e) Lh^(1/2)."""
    errors = [np.asarray(qt, dtype=float) - np.asarray(qh, dtype=float)
              for qt, qh in zip(instance.q_true, instance.q_hat)]
    d_tilde = stack_dictionary(instance.delays_s, instance.schedule.weights, errors,
                               num_subcarriers, symbol_duration_s)
    half = np.sqrt(np.asarray(instance.gain_variances, dtype=float))
    return half[:, None] * (d_tilde.conj().T @ d_tilde) * half[None, :]


def pep_report(instance: PepInstance, noise_variance: float, num_subcarriers: int,
               symbol_duration_s: float, rank_rel_tol: float = DEFAULT_RANK_REL_TOL,
               variance_convention: str = "paper") -> PepReport:
    """Eigen-summary of the squared difference matrix plus the PEP bounds.

    bound_product multiplies 1/(lambda_p / (2 N_0) + 1) over the numerical
    rank (the paper convention; the unit convention replaces 2 N_0 by
    4 N_0).  bound_exponent is the looser product of the inverted SNR
    terms, undefined (None) at rank 0.
    """
    if noise_variance <= 0:
        raise ValueError("noise variance must be positive")
    if variance_convention not in VARIANCE_CONVENTIONS:
        raise ValueError(f"variance_convention must be one of {VARIANCE_CONVENTIONS}")
    mat = squared_difference_matrix(instance, num_subcarriers, symbol_duration_s)
    eigvals = hermitian_eig(mat).eigenvalues
    lam_max = float(eigvals[0]) if len(eigvals) else 0.0
    if lam_max <= 0:
        rank = 0
    else:
        rank = int(np.sum(eigvals > rank_rel_tol * lam_max))
    nonzero = np.clip(eigvals[:rank], a_min=np.finfo(float).tiny, a_max=None)
    denom = 2.0 * noise_variance if variance_convention == "paper" else 4.0 * noise_variance
    if rank == 0:
        return PepReport(eigenvalues=eigvals, rank=0, geomean_nonzero=None,
                         bound_product=1.0, bound_exponent=None)
    geomean = float(np.exp(np.mean(np.log(nonzero))))
    log_product = -float(np.sum(np.log1p(nonzero / denom)))
    log_exponent = -float(np.sum(np.log(nonzero / denom)))
    return PepReport(eigenvalues=eigvals, rank=rank, geomean_nonzero=geomean,
                     bound_product=math.exp(log_product),
                     bound_exponent=math.exp(log_exponent))


def enumerate_distortions(q_true, true_indices=None):
    """All single-target single-beam substitutions of the true beamspace set.

    For each target p and each beam j other than its dominant beam, the
    dominant entry is swapped with entry j (magnitudes preserved), the other
    targets left untouched: P * (N_b - 1) distorted sets in total.
    """
    q_true = [np.asarray(q, dtype=float) for q in q_true]
    n_b = q_true[0].shape[0]
    if true_indices is None:
        true_indices = [int(np.argmax(q)) for q in q_true]
    out = []
    for p, q in enumerate(q_true):
        top = true_indices[p]
        for j in range(n_b):
            if j == top:
                continue
            q_new = q.copy()
            q_new[top], q_new[j] = q[j], q[top]
            distorted = [qq.copy() for qq in q_true]
            distorted[p] = q_new
            out.append(tuple(distorted))
    return out


def rank_geomean_campaign(config: PhysicalConfig, cb: Codebook, strategy: str,
                          l_list, num_instances: int, rng: np.random.Generator,
                          noise_variance: float,
                          rank_rel_tol: float = DEFAULT_RANK_REL_TOL):
    """Rank/geomean rows over sampled scenes and all enumerated distortions.

    Yields one row per (L, instance, distortion) matching PEP_CSV_HEADER.
    """
    t_sym = config.symbol_duration_s
    n_s = config.num_subcarriers
    for l_slots in l_list:
        for inst in range(num_instances):
            scene = sample_geometry(config, rng, geometry_id=inst)
            schedule = make_schedule(strategy, config.num_beams, int(l_slots), rng)
            q_true = [beamspace_vector(cb, t.aoa_rad) for t in scene.targets]
            true_idx = [covering_beam(cb, t.aoa_rad) for t in scene.targets]
            delays = scene.delays % t_sym
            variances = scene.gain_variances
            for dist_id, q_hat in enumerate(enumerate_distortions(q_true, true_idx)):
                instance = PepInstance(delays_s=delays, schedule=schedule,
                                       gain_variances=variances,
                                       q_true=tuple(q_true), q_hat=q_hat)
                report = pep_report(instance, noise_variance, n_s, t_sym,
                                    rank_rel_tol=rank_rel_tol)
                yield {
                    "strategy": strategy,
                    "L": int(l_slots),
                    "instance": inst,
                    "distortion": dist_id,
                    "rank": report.rank,
                    "geomean": report.geomean_nonzero,
                    "bound_product": report.bound_product,
                }


def write_pep_csv(rows, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(PEP_CSV_HEADER)
        for row in rows:
            geomean = row["geomean"]
            writer.writerow([
                row["strategy"], row["L"], row["instance"], row["distortion"],
                row["rank"], "" if geomean is None else repr(float(geomean)),
                repr(float(row["bound_product"])),
            ])
