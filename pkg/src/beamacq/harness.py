"""Monte Carlo campaign runner: scenes through acquisition to MD/FA rates.

Per-trial randomness is derived from the master seed with distinct stream
labels per stage (geometry, realization, schedule, noise), keyed by the
trial coordinates rather than the worker, so outputs are byte-identical
for any worker count and toggling one stage never shifts another's draws.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .acquisition import TwoStageAcquisition
from .codebook import Codebook, build_codebook, covering_beam
from .lasso import (DEFAULT_BETA_FLOOR_RATIO, DEFAULT_BETA_PATH_SIZE, DEFAULT_KKT_TOL,
                    DEFAULT_MAX_ITERS, DEFAULT_SUPPORT_EPS, EmptyPath, EmptySupport)
from .music import DEFAULT_GRID_OVERSAMPLING
from .pep import rank_geomean_campaign, write_pep_csv
from .scene import (PhysicalConfig, Scene, dbm_per_hz_to_w_per_hz, dbsm_to_sqm,
                    sample_geometry, sample_realization)
from .signal import STRATEGIES, make_schedule, noise_variance, observe, radar_response

# Stream labels for seed derivation; values are arbitrary but fixed.
STREAM_GEOMETRY = 0xA1
STREAM_REALIZATION = 0xB2
STREAM_SCHEDULE = 0xC3
STREAM_NOISE = 0xD4
STREAM_PEP = 0xE5

MD_FA_CSV_HEADER = ["strategy", "L", "genie", "trials", "failures", "p_md_mean",
                    "p_md_stderr", "p_fa_mean", "p_fa_stderr"]
TRIALS_CSV_HEADER = ["strategy", "L", "genie", "geometry", "realization", "p_md",
                     "p_fa", "delay_err_max_s"]


@dataclass(frozen=True)
class SolverKnobs:
    beta_path_size: int = DEFAULT_BETA_PATH_SIZE
    beta_floor_ratio: float = DEFAULT_BETA_FLOOR_RATIO
    max_iters: int = DEFAULT_MAX_ITERS
    kkt_tol: float = DEFAULT_KKT_TOL
    support_eps: float = DEFAULT_SUPPORT_EPS
    grid_oversampling: int = DEFAULT_GRID_OVERSAMPLING


@dataclass(frozen=True)
class CampaignConfig:
    physical: PhysicalConfig = field(default_factory=PhysicalConfig)
    strategies: tuple[str, ...] = STRATEGIES
    l_list: tuple[int, ...] = (6, 12, 18, 24, 30, 36, 42, 48)
    num_geometries: int = 50
    num_realizations: int = 100
    master_seed: int = 0
    genie_delays: bool = False
    output_dir: str = "out"
    solver: SolverKnobs = field(default_factory=SolverKnobs)
    jobs: int = 1
    pep_instances: int = 50

    def __post_init__(self):
        if self.num_geometries < 1 or self.num_realizations < 1:
            raise ValueError("campaign needs at least one geometry and one realization")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ValueError(f"unknown strategy {s!r}")


def _stream(master_seed: int, label: int, *ids: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, label, *ids]))


def load_config(path) -> CampaignConfig:
    """Read a JSON campaign config; dB-suffixed physical keys are converted."""
    with open(path) as fh:
        raw = json.load(fh)
    phys_raw = dict(raw.get("physical", {}))
    if "noise_psd_dbm_per_hz" in phys_raw:
        phys_raw["noise_psd_w_per_hz"] = dbm_per_hz_to_w_per_hz(
            phys_raw.pop("noise_psd_dbm_per_hz"))
    if "rcs_dbsm" in phys_raw:
        phys_raw["rcs_sqm"] = dbsm_to_sqm(phys_raw.pop("rcs_dbsm"))
    if "aoa_range_deg" in phys_raw:
        lo, hi = phys_raw.pop("aoa_range_deg")
        phys_raw["aoa_range_rad"] = (math.radians(lo), math.radians(hi))
    for key in ("distance_range_m", "aoa_range_rad"):
        if key in phys_raw:
            phys_raw[key] = tuple(phys_raw[key])
    physical = PhysicalConfig(**phys_raw)
    solver = SolverKnobs(**raw.get("solver", {}))
    return CampaignConfig(
        physical=physical,
        strategies=tuple(raw.get("strategies", STRATEGIES)),
        l_list=tuple(int(x) for x in raw.get("L", (6, 12, 18, 24, 30, 36, 42, 48))),
        num_geometries=int(raw.get("num_geometries", 50)),
        num_realizations=int(raw.get("num_realizations", 100)),
        master_seed=int(raw.get("master_seed", 0)),
        genie_delays=bool(raw.get("genie_delays", False)),
        output_dir=str(raw.get("output_dir", "out")),
        solver=solver,
        jobs=int(raw.get("jobs", 1)),
        pep_instances=int(raw.get("pep_instances", 50)),
    )


@dataclass(frozen=True)
class TrialOutcome:
    strategy: str
    num_slots: int
    genie: bool
    geometry_id: int
    realization_id: int
    p_md: float
    p_fa: float
    delay_err_max_s: float
    failed: bool
    est_delays: np.ndarray | None = None
    est_beam_indices: np.ndarray | None = None
    true_beam_indices: np.ndarray | None = None


def md_fa(true_beams, detected_beams, num_targets: int) -> tuple[float, float]:
    """Per-beam count metrics: misses and surplus detections over P.

    P_MD sums max(0, actual_i - detected_i) over beams, P_FA sums
    max(0, detected_i - actual_i); both normalized by num_targets.
    """
    true_beams = list(true_beams)
    detected = list(detected_beams)
    if len(true_beams) != num_targets:
        raise ValueError("true beam multiset must have one entry per target")
    beams = set(true_beams) | set(detected)
    p_md = sum(max(0, true_beams.count(b) - detected.count(b)) for b in beams)
    p_fa = sum(max(0, detected.count(b) - true_beams.count(b)) for b in beams)
    return p_md / num_targets, p_fa / num_targets


def _delay_error_mod(est: np.ndarray, truth: np.ndarray, period: float) -> float:
    errs = []
    for tau in est:
        diffs = np.abs((truth - tau) % period)
        errs.append(float(np.min(np.minimum(diffs, period - diffs))))
    return max(errs)


def run_trial(scene: Scene, cb: Codebook, config: PhysicalConfig, strategy: str,
              num_slots: int, knobs: SolverKnobs, schedule_rng: np.random.Generator,
              noise_rng: np.random.Generator, genie: bool) -> TrialOutcome:
    """One observation block through the two-stage (or genie) acquisition."""
    schedule = make_schedule(strategy, config.num_beams, num_slots, schedule_rng)
    response = radar_response(scene, cb, config.num_subcarriers,
                              config.symbol_duration_s)
    block = observe(response, schedule, noise_variance(config), config.tx_power_w,
                    noise_rng, scene)
    return _acquire(block.observations, scene, cb, config, strategy, num_slots,
                    knobs, schedule.weights, genie)


def _acquire(observations, scene, cb, config, strategy, num_slots, knobs,
             schedule_weights, genie) -> TrialOutcome:
    t_sym = config.symbol_duration_s
    true_beams = np.array([covering_beam(cb, t.aoa_rad) for t in scene.targets])
    true_delays_mod = scene.delays % t_sym
    estimator = TwoStageAcquisition(
        num_targets=config.num_targets, symbol_duration_s=t_sym,
        grid_oversampling=knobs.grid_oversampling, beta_path_size=knobs.beta_path_size,
        beta_floor_ratio=knobs.beta_floor_ratio, max_iters=knobs.max_iters,
        kkt_tol=knobs.kkt_tol, support_eps=knobs.support_eps)
    try:
        estimator.fit(observations, schedule_weights,
                      true_delays=scene.delays if genie else None)
    except (EmptySupport, EmptyPath):
        # Failed-trial convention: all targets missed, nothing detected.
        return TrialOutcome(strategy=strategy, num_slots=num_slots, genie=genie,
                            geometry_id=scene.geometry_id,
                            realization_id=scene.realization_id,
                            p_md=1.0, p_fa=0.0, delay_err_max_s=float("nan"),
                            failed=True, true_beam_indices=true_beams)
    delay_err = (0.0 if genie else
                 _delay_error_mod(estimator.delays_, true_delays_mod, t_sym))
    p_md, p_fa = md_fa(true_beams.tolist(), estimator.beam_indices_.tolist(),
                       config.num_targets)
    return TrialOutcome(strategy=strategy, num_slots=num_slots, genie=genie,
                        geometry_id=scene.geometry_id,
                        realization_id=scene.realization_id,
                        p_md=p_md, p_fa=p_fa, delay_err_max_s=delay_err, failed=False,
                        est_delays=estimator.delays_,
                        est_beam_indices=estimator.beam_indices_,
                        true_beam_indices=true_beams)


# Worker-global state for the process pool (set by the initializer).
_WORKER: dict = {}


def _init_worker(config: CampaignConfig, cb: Codebook):
    _WORKER["config"] = config
    _WORKER["cb"] = cb
    # One BLAS thread per worker; trials are the parallel unit.
    os.environ.setdefault("OMP_NUM_THREADS", "1")


def _trial_task(task: tuple[int, int, int, int]) -> list[TrialOutcome]:
    strat_idx, num_slots, geom_id, real_id = task
    config: CampaignConfig = _WORKER["config"]
    cb: Codebook = _WORKER["cb"]
    return _run_trial_variants(config, cb, strat_idx, num_slots, geom_id, real_id)


def _run_trial_variants(config: CampaignConfig, cb: Codebook, strat_idx: int,
                        num_slots: int, geom_id: int, real_id: int) -> list[TrialOutcome]:
    phys = config.physical
    strategy = config.strategies[strat_idx]
    seed = config.master_seed
    geometry = sample_geometry(phys, _stream(seed, STREAM_GEOMETRY, geom_id), geom_id)
    scene = sample_realization(
        geometry, _stream(seed, STREAM_REALIZATION, geom_id, real_id), real_id)
    schedule_rng = _stream(seed, STREAM_SCHEDULE, strat_idx, num_slots, geom_id, real_id)
    noise_rng = _stream(seed, STREAM_NOISE, strat_idx, num_slots, geom_id, real_id)

    schedule = make_schedule(strategy, phys.num_beams, num_slots, schedule_rng)
    response = radar_response(scene, cb, phys.num_subcarriers, phys.symbol_duration_s)
    block = observe(response, schedule, noise_variance(phys), phys.tx_power_w,
                    noise_rng, scene)
    variants = [False] + ([True] if config.genie_delays else [])
    return [_acquire(block.observations, scene, cb, phys, strategy, num_slots,
                     config.solver, schedule.weights, genie)
            for genie in variants]


@dataclass(frozen=True)
class CampaignPaths:
    md_fa_csv: str
    trials_csv: str


def run_campaign(config: CampaignConfig, cb: Codebook | None = None) -> CampaignPaths:
    """Run the full MD/FA campaign and write trials.csv and md_fa.csv.

    Aggregation happens in deterministic trial order whatever the worker
    count; reruns with the same config and seed are byte-identical.
    """
    if cb is None:
        cb = build_codebook(config.physical.num_antennas, config.physical.num_beams,
                            config.physical.aoa_range_rad)
    tasks = [(si, l_slots, g, r)
             for si in range(len(config.strategies))
             for l_slots in config.l_list
             for g in range(config.num_geometries)
             for r in range(config.num_realizations)]

    if config.jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs, initializer=_init_worker,
                                 initargs=(config, cb)) as pool:
            per_task = list(pool.map(_trial_task, tasks, chunksize=16))
    else:
        per_task = [_run_trial_variants(config, cb, *task) for task in tasks]

    outcomes = [o for group in per_task for o in group]
    order = {s: i for i, s in enumerate(config.strategies)}
    outcomes.sort(key=lambda o: (order[o.strategy], o.num_slots, o.genie,
                                 o.geometry_id, o.realization_id))

    os.makedirs(config.output_dir, exist_ok=True)
    trials_path = os.path.join(config.output_dir, "trials.csv")
    md_fa_path = os.path.join(config.output_dir, "md_fa.csv")

    with open(trials_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRIALS_CSV_HEADER)
        for o in outcomes:
            writer.writerow([o.strategy, o.num_slots, int(o.genie), o.geometry_id,
                             o.realization_id, repr(o.p_md), repr(o.p_fa),
                             repr(o.delay_err_max_s)])

    with open(md_fa_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(MD_FA_CSV_HEADER)
        for strategy in config.strategies:
            for l_slots in config.l_list:
                for genie in (False, True) if config.genie_delays else (False,):
                    cell = [o for o in outcomes
                            if (o.strategy, o.num_slots, o.genie) ==
                            (strategy, l_slots, genie)]
                    if not cell:
                        continue
                    md = np.array([o.p_md for o in cell])
                    fa = np.array([o.p_fa for o in cell])
                    n = len(cell)
                    md_se = float(np.std(md, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
                    fa_se = float(np.std(fa, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
                    writer.writerow([strategy, l_slots, int(genie), n,
                                     sum(o.failed for o in cell),
                                     repr(float(md.mean())), repr(md_se),
                                     repr(float(fa.mean())), repr(fa_se)])
    return CampaignPaths(md_fa_csv=md_fa_path, trials_csv=trials_path)


def run_pep_campaign(config: CampaignConfig, cb: Codebook | None = None) -> str:
    """Rank/geomean evaluation over sampled scenes; writes pep.csv."""
    if cb is None:
        cb = build_codebook(config.physical.num_antennas, config.physical.num_beams,
                            config.physical.aoa_range_rad)
    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, "pep.csv")
    n0 = noise_variance(config.physical)
    rows = []
    for si, strategy in enumerate(config.strategies):
        rng = _stream(config.master_seed, STREAM_PEP, si)
        rows.extend(rank_geomean_campaign(config.physical, cb, strategy, config.l_list,
                                          config.pep_instances, rng, n0))
    write_pep_csv(rows, path)
    return path
