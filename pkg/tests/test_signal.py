import math

import numpy as np
import pytest

from beamacq.codebook import beamspace_vector
from beamacq.numerics import hermitian_eig
from beamacq.scene import (PhysicalConfig, Scene, Target, dbm_per_hz_to_w_per_hz,
                           sample_geometry, sample_realization, steering_vector)
from beamacq.signal import (make_schedule, noise_variance, observe, observe_via_pilots,
                            radar_response)


def scene_with(distances, aoas, gains, config):
    targets = []
    for d, phi, h in zip(distances, aoas, gains):
        targets.append(Target(distance_m=d, aoa_rad=phi, delay_s=2 * d / 299_792_458.0,
                              gain_variance=1.0, gain=h))
    return Scene(targets=tuple(targets))


class TestMakeSchedule:
    def test_sweep_first_columns_one_hot(self):
        sched = make_schedule("sweep", 36, 6)
        expected = np.zeros((36, 6))
        expected[np.arange(6), np.arange(6)] = 1.0
        assert np.array_equal(sched.weights, expected)

    def test_sweep_wraps(self):
        sched = make_schedule("sweep", 36, 40)
        assert sched.weights[0, 36] == 1.0  # column 37 re-probes beam 1
        assert sched.weights[3, 39] == 1.0
        assert np.all(sched.weights.sum(axis=0) == 1.0)

    def test_sweep_orthonormal_when_short(self):
        w = make_schedule("sweep", 36, 24).weights
        assert np.allclose(w.T @ w, np.eye(24))

    def test_random_mean_column_sum(self, rng):
        w = make_schedule("random", 36, 10_000, rng).weights
        mean_sum = w.sum(axis=0).mean()
        assert 0.97 <= mean_sum <= 1.03

    def test_random_nonnegative(self, rng):
        w = make_schedule("random", 36, 64, rng).weights
        assert np.all(w >= 0)

    def test_unknown_strategy(self):
        with pytest.raises(ValueError):
            make_schedule("exhaustive", 36, 6)

    def test_zero_slots_rejected(self):
        with pytest.raises(ValueError):
            make_schedule("sweep", 36, 0)


class TestRadarResponse:
    def test_single_target_zero_delay_rank_one(self, paper_codebook, paper_config):
        scene = scene_with([1e-6], [0.3], [1.0 + 0j], paper_config)
        resp = radar_response(scene, paper_codebook, 36, paper_config.symbol_duration_s)
        q = beamspace_vector(paper_codebook, 0.3)
        # delay ~ 0: all rows of T equal q
        assert np.allclose(resp.response, np.tile(q, (36, 1)), atol=1e-6)

    def test_factorization_identity(self, paper_codebook, paper_config, rng):
        scene = sample_realization(sample_geometry(paper_config, rng), rng)
        resp = radar_response(scene, paper_codebook, 36, paper_config.symbol_duration_s)
        recon = resp.delay_matrix @ resp.beam_gains.T
        assert np.linalg.norm(resp.response - recon) <= 1e-12 * np.linalg.norm(recon)

    def test_numerical_rank_is_num_targets(self, paper_codebook, paper_config, rng):
        scene = sample_realization(sample_geometry(paper_config, rng), rng)
        resp = radar_response(scene, paper_codebook, 36, paper_config.symbol_duration_s)
        t = resp.response
        eigvals = hermitian_eig(t.conj().T @ t).eigenvalues
        thresh = 1e-9 * eigvals[0]
        assert int(np.sum(eigvals > thresh)) == paper_config.num_targets

    def test_beam_gain_columns_constant_phase(self, paper_codebook, paper_config, rng):
        scene = sample_realization(sample_geometry(paper_config, rng), rng)
        resp = radar_response(scene, paper_codebook, 36, paper_config.symbol_duration_s)
        for p, target in enumerate(scene.targets):
            col = resp.beam_gains[:, p]
            assert np.allclose(col, target.gain * np.abs(col / target.gain))

    def test_matches_frequency_channel_oracle(self, paper_codebook, paper_config, rng):
        # Rebuild T entry-by-entry from f_i^H H_k f_i with
        # H_k = sum_p h_p a a^H exp(-j 2 pi k tau_p / T).
        cfg = paper_config
        scene = sample_realization(sample_geometry(cfg, rng), rng)
        # unit-scale gains keep the comparison well conditioned
        scene = scene_with(scene.distances, scene.aoas,
                           np.exp(1j * rng.uniform(0, 2 * np.pi, 3)), cfg)
        resp = radar_response(scene, paper_codebook, cfg.num_subcarriers,
                              cfg.symbol_duration_s)
        t_sym = cfg.symbol_duration_s
        f = paper_codebook.beams
        oracle = np.zeros((cfg.num_subcarriers, cfg.num_beams), dtype=complex)
        for k in range(cfg.num_subcarriers):
            h_k = np.zeros((cfg.num_antennas, cfg.num_antennas), dtype=complex)
            for target in scene.targets:
                a = steering_vector(target.aoa_rad, cfg.num_antennas)
                h_k += (target.gain * np.exp(-2j * np.pi * k * target.delay_s / t_sym)
                        * np.outer(a, a.conj()))
            for i in range(cfg.num_beams):
                oracle[k, i] = f[:, i].conj() @ h_k @ f[:, i]
        err = np.linalg.norm(resp.response - oracle) / np.linalg.norm(oracle)
        assert err <= 1e-10


class TestObserve:
    def test_noiseless_exact(self, paper_codebook, paper_config, rng):
        scene = sample_realization(sample_geometry(paper_config, rng), rng)
        resp = radar_response(scene, paper_codebook, 36, paper_config.symbol_duration_s)
        sched = make_schedule("sweep", 36, 12)
        block = observe(resp, sched, 0.0, 4.0, rng, scene)
        assert np.array_equal(block.observations,
                              2.0 * (resp.response @ sched.weights))

    def test_noise_variance_moment(self, paper_codebook, paper_config, rng):
        scene = scene_with([10.0], [0.2], [0.0 + 0j], paper_config)  # T = 0
        resp = radar_response(scene, paper_codebook, 36, paper_config.symbol_duration_s)
        sched = make_schedule("sweep", 36, 300)  # 36*300 > 1e4 entries
        nv = 2.5e-3
        block = observe(resp, sched, nv, 1.0, rng, scene)
        sample_var = np.mean(np.abs(block.observations) ** 2)
        assert abs(sample_var - nv) <= 0.05 * nv

    def test_energy_identity(self, paper_codebook, paper_config, rng):
        scene = sample_realization(sample_geometry(paper_config, rng), rng)
        resp = radar_response(scene, paper_codebook, 36, paper_config.symbol_duration_s)
        sched = make_schedule("sweep", 36, 36)
        signal_energy = np.linalg.norm(resp.response @ sched.weights) ** 2
        nv = signal_energy / (36 * 36)  # comparable scales
        tx = 1.7
        total = np.mean([np.linalg.norm(observe(resp, sched, nv, tx, rng,
                                                scene).observations) ** 2
                         for _ in range(200)])
        expected = tx * signal_energy + 36 * 36 * nv
        assert abs(total - expected) <= 0.03 * expected

    def test_reproducible_from_seed(self, paper_codebook, paper_config):
        rng1 = np.random.default_rng(99)
        rng2 = np.random.default_rng(99)
        scene = sample_realization(sample_geometry(paper_config, rng1),
                                   rng1)
        scene2 = sample_realization(sample_geometry(paper_config, rng2), rng2)
        resp = radar_response(scene, paper_codebook, 36, paper_config.symbol_duration_s)
        resp2 = radar_response(scene2, paper_codebook, 36, paper_config.symbol_duration_s)
        b1 = observe(resp, make_schedule("sweep", 36, 6), 1e-14, 1.0, rng1, scene)
        b2 = observe(resp2, make_schedule("sweep", 36, 6), 1e-14, 1.0, rng2, scene2)
        assert np.array_equal(b1.observations, b2.observations)

    def test_shape_mismatch(self, paper_codebook, paper_config, rng):
        scene = sample_realization(sample_geometry(paper_config, rng), rng)
        resp = radar_response(scene, paper_codebook, 36, paper_config.symbol_duration_s)
        sched = make_schedule("sweep", 18, 6)
        with pytest.raises(ValueError):
            observe(resp, sched, 0.0, 1.0, rng, scene)


class TestNoiseVariance:
    def test_psd_conversion(self):
        assert np.isclose(dbm_per_hz_to_w_per_hz(-174.0), 3.981e-21, rtol=1e-3)

    def test_reference_value(self, paper_config):
        assert np.isclose(noise_variance(paper_config), 1.770e-14, rtol=1e-3)

    def test_scaling_with_subcarriers(self):
        v36 = noise_variance(PhysicalConfig(num_subcarriers=36))
        v72 = noise_variance(PhysicalConfig(num_subcarriers=72))
        assert np.isclose(v36, 2 * v72)


class TestPilotDivision:
    def test_moments_match_direct_path(self, paper_codebook, paper_config, rng):
        scene = sample_realization(sample_geometry(paper_config, rng), rng)
        resp = radar_response(scene, paper_codebook, 36, paper_config.symbol_duration_s)
        sched = make_schedule("sweep", 36, 36)
        signal = resp.response @ sched.weights
        nv = float(np.mean(np.abs(signal) ** 2))
        direct = np.stack([observe(resp, sched, nv, 1.0, rng, scene).observations
                           for _ in range(60)])
        pilot = np.stack([observe_via_pilots(resp, sched, nv, 1.0, rng, scene).observations
                          for _ in range(60)])
        # identical means (the signal part) and matching noise second moments
        assert np.allclose(direct.mean(axis=0), signal, atol=4 * math.sqrt(nv / 60))
        assert np.allclose(pilot.mean(axis=0), signal, atol=4 * math.sqrt(nv / 60))
        var_direct = np.mean(np.abs(direct - signal) ** 2)
        var_pilot = np.mean(np.abs(pilot - signal) ** 2)
        assert abs(var_direct - nv) <= 0.05 * nv
        assert abs(var_pilot - nv) <= 0.05 * nv
