"""Command-line entry points for campaigns, diagnostics and dumps."""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace

import numpy as np

from .codebook import build_codebook, dump_csv
from .harness import (STREAM_GEOMETRY, STREAM_NOISE, STREAM_REALIZATION,
                      STREAM_SCHEDULE, CampaignConfig, _stream, load_config,
                      run_campaign, run_pep_campaign)
from .music import estimate_delays
from .scene import sample_geometry, sample_realization
from .signal import make_schedule, noise_variance, observe, radar_response


def _apply_overrides(config: CampaignConfig, args) -> CampaignConfig:
    updates = {}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.out is not None:
        updates["output_dir"] = args.out
    if getattr(args, "genie_delays", False):
        updates["genie_delays"] = True
    if getattr(args, "strategy", None):
        updates["strategies"] = (args.strategy,)
    if getattr(args, "L", None):
        updates["l_list"] = tuple(int(x) for x in args.L.split(","))
    if getattr(args, "jobs", None):
        updates["jobs"] = args.jobs
    return replace(config, **updates) if updates else config


def _load(args) -> CampaignConfig:
    config = load_config(args.config) if args.config else CampaignConfig()
    return _apply_overrides(config, args)


def _add_common(parser: argparse.ArgumentParser, jobs: bool = False):
    parser.add_argument("--config", help="JSON campaign config file")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--strategy", choices=("sweep", "random"), default=None,
                        help="restrict to one probing strategy")
    parser.add_argument("--L", default=None, help="comma-separated time slot counts")
    if jobs:
        parser.add_argument("--jobs", type=int, default=None, help="worker processes")


def cmd_simulate(args) -> int:
    config = _load(args)
    paths = run_campaign(config)
    print(f"wrote {paths.md_fa_csv}")
    print(f"wrote {paths.trials_csv}")
    return 0


def cmd_pep_eval(args) -> int:
    config = _load(args)
    path = run_pep_campaign(config)
    print(f"wrote {path}")
    return 0


def cmd_music_demo(args) -> int:
    config = _load(args)
    phys = config.physical
    strategy = config.strategies[0]
    num_slots = config.l_list[0]
    cb = build_codebook(phys.num_antennas, phys.num_beams, phys.aoa_range_rad)
    seed = config.master_seed
    geometry = sample_geometry(phys, _stream(seed, STREAM_GEOMETRY, 0), 0)
    scene = sample_realization(geometry, _stream(seed, STREAM_REALIZATION, 0, 0), 0)
    schedule = make_schedule(strategy, phys.num_beams, num_slots,
                             _stream(seed, STREAM_SCHEDULE, 0, num_slots, 0, 0))
    block = observe(radar_response(scene, cb, phys.num_subcarriers,
                                   phys.symbol_duration_s),
                    schedule, noise_variance(phys), phys.tx_power_w,
                    _stream(seed, STREAM_NOISE, 0, num_slots, 0, 0), scene)
    est = estimate_delays(block.observations, phys.num_targets,
                          phys.symbol_duration_s, config.solver.grid_oversampling)
    os.makedirs(config.output_dir, exist_ok=True)
    path = os.path.join(config.output_dir, "spectrum.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau_s", "p_mu"])
        for tau, val in zip(est.grid_taus, est.pseudo_spectrum):
            writer.writerow([repr(float(tau)), repr(float(val))])
    true_mod = np.sort(scene.delays % phys.symbol_duration_s)
    print(f"wrote {path}")
    print("true delays mod T (s):", " ".join(f"{t:.4e}" for t in true_mod))
    print("estimated delays (s): ", " ".join(f"{t:.4e}" for t in est.delays_s))
    return 0


def cmd_codebook_dump(args) -> int:
    config = _load(args)
    phys = config.physical
    cb = build_codebook(phys.num_antennas, phys.num_beams, phys.aoa_range_rad)
    os.makedirs(config.output_dir, exist_ok=True)
    gram_path = os.path.join(config.output_dir, "codebook_gram.csv")
    profile_path = os.path.join(config.output_dir, "codebook_profiles.csv")
    dump_csv(cb, gram_path, profile_path)
    print(f"wrote {gram_path}")
    print(f"wrote {profile_path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="beamacq",
        description="Radar-assisted user acquisition simulator (MUSIC + LASSO)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run the MD/FA Monte Carlo campaign")
    _add_common(p, jobs=True)
    p.add_argument("--genie-delays", action="store_true",
                   help="also run the known-delay baseline")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("pep-eval", help="rank/geomean evaluation of probing strategies")
    _add_common(p)
    p.set_defaults(func=cmd_pep_eval)

    p = sub.add_parser("music-demo", help="dump one trial's delay pseudo-spectrum")
    _add_common(p)
    p.set_defaults(func=cmd_music_demo)

    p = sub.add_parser("codebook-dump", help="dump codebook Gram and gain profiles")
    _add_common(p)
    p.set_defaults(func=cmd_codebook_dump)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
