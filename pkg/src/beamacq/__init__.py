"""Radar-assisted user acquisition for downlink MIMO-OFDM.

Simulates backscatter probing through a flat-top beam codebook, runs the
two-stage MUSIC + LASSO acquisition, evaluates pairwise-error-probability
design metrics for probing schedules, and drives Monte Carlo campaigns.
"""

from .acquisition import TwoStageAcquisition
from .codebook import Codebook, beamspace_vector, build_codebook, covering_beam, dft_codebook
from .harness import CampaignConfig, SolverKnobs, load_config, md_fa, run_campaign, run_pep_campaign
from .lasso import BeamspaceLasso, build_problem, extract_beam_indices, fista_solve, solve_path
from .music import MusicDelayEstimator, estimate_delays, pseudo_spectrum, sample_covariance
from .numerics import HermitianEig, hermitian_eig, kron, soft_threshold_complex, spectral_norm_sq
from .pep import PepInstance, PepReport, enumerate_distortions, pep_report, squared_difference_matrix, stack_dictionary
from .scene import (PhysicalConfig, Scene, Target, delay_steering_vector, gain_variance,
                    sample_geometry, sample_realization, steering_vector)
from .signal import (BeamSchedule, ObservationBlock, RadarResponse, make_schedule,
                     noise_variance, observe, observe_via_pilots, radar_response)

__version__ = "0.1.0"

__all__ = [
    "TwoStageAcquisition", "Codebook", "beamspace_vector", "build_codebook",
    "covering_beam", "dft_codebook", "CampaignConfig", "SolverKnobs", "load_config",
    "md_fa", "run_campaign", "run_pep_campaign", "BeamspaceLasso", "build_problem",
    "extract_beam_indices", "fista_solve", "solve_path", "MusicDelayEstimator",
    "estimate_delays", "pseudo_spectrum", "sample_covariance", "HermitianEig",
    "hermitian_eig", "kron", "soft_threshold_complex", "spectral_norm_sq",
    "PepInstance", "PepReport", "enumerate_distortions", "pep_report",
    "squared_difference_matrix", "stack_dictionary", "PhysicalConfig", "Scene",
    "Target", "delay_steering_vector", "gain_variance", "sample_geometry",
    "sample_realization", "steering_vector", "BeamSchedule", "ObservationBlock",
    "RadarResponse", "make_schedule", "noise_variance", "observe",
    "observe_via_pilots", "radar_response",
]
