"""Acceptance suite: every criterion prints one pass/fail line.

The Monte Carlo campaign criteria run at the sanctioned reduced scale
(20 geometries x 50 realizations) with the documented fast solver knobs;
the noiseless end-to-end criterion runs on the library defaults.  Run with
``pytest -s tests/test_acceptance.py`` to see the per-criterion lines.
"""

import csv
import math
import time

import numpy as np
import pytest

from beamacq.harness import (CampaignConfig, SolverKnobs, _run_trial_variants,
                             run_campaign)
from beamacq.lasso import LassoProblem, fista_solve
from beamacq.numerics import hermitian_eig, kron, soft_threshold_complex
from beamacq.pep import (PepInstance, pep_report, rank_geomean_campaign,
                         squared_difference_matrix)
from beamacq.scene import PhysicalConfig
from beamacq.signal import make_schedule, noise_variance

from conftest import random_complex, random_hermitian

MASTER_SEED = 20250810
CAMPAIGN_KNOBS = SolverKnobs(beta_path_size=16, beta_floor_ratio=1e-3, max_iters=300,
                             kkt_tol=1e-4)


def report(name, elapsed, detail=""):
    print(f"\n[PASS] {name} ({elapsed:.1f}s) {detail}")


@pytest.fixture(scope="module")
def campaign(tmp_path_factory, paper_codebook):
    """Shared MD/FA campaign for the crossover and genie-bound criteria."""
    out = tmp_path_factory.mktemp("campaign")
    config = CampaignConfig(
        physical=PhysicalConfig(), strategies=("sweep", "random"),
        l_list=(6, 18, 36, 48), num_geometries=20, num_realizations=50,
        master_seed=MASTER_SEED, genie_delays=True, output_dir=str(out),
        solver=CAMPAIGN_KNOBS, jobs=1)
    t0 = time.time()
    paths = run_campaign(config, cb=paper_codebook)
    elapsed = time.time() - t0
    cells = {}
    with open(paths.md_fa_csv) as fh:
        for row in csv.DictReader(fh):
            key = (row["strategy"], int(row["L"]), int(row["genie"]))
            cells[key] = {k: float(row[k]) for k in
                          ("p_md_mean", "p_md_stderr", "p_fa_mean", "p_fa_stderr")}
            cells[key]["failures"] = int(row["failures"])
    assert elapsed < 1800, f"campaign took {elapsed:.0f}s, budget 30 min"
    return {"cells": cells, "elapsed": elapsed, "config": config, "paths": paths}


@pytest.fixture(scope="module")
def pep_campaign(paper_codebook):
    """Shared rank/geomean evaluation for the probing-strategy criteria."""
    cfg = PhysicalConfig()
    n0 = noise_variance(cfg)
    t0 = time.time()
    rows = {}
    for strategy in ("sweep", "random"):
        rng = np.random.default_rng([MASTER_SEED, 0xE5, 0])
        rows[strategy] = list(rank_geomean_campaign(
            cfg, paper_codebook, strategy, (6, 18, 36), 50, rng, n0))
    return {"rows": rows, "elapsed": time.time() - t0}


class TestNumericsSuite:
    def test_criterion_numerics(self, rng):
        t0 = time.time()
        # eigendecomposition reconstruction on 100 random Hermitian matrices
        for _ in range(100):
            n = int(rng.integers(2, 37))
            a = random_hermitian(rng, n)
            eig = hermitian_eig(a)
            recon = eig.eigenvectors @ np.diag(eig.eigenvalues) @ eig.eigenvectors.conj().T
            assert np.linalg.norm(a - recon) <= 1e-9 * np.linalg.norm(a)
        # Kronecker mixed-product identity
        for _ in range(20):
            a, c = random_complex(rng, 3, 3), random_complex(rng, 3, 2)
            b, d = random_complex(rng, 2, 2), random_complex(rng, 2, 3)
            lhs = kron(a, b) @ kron(c, d)
            rhs = kron(a @ c, b @ d)
            assert np.abs(lhs - rhs).max() <= 1e-12 * max(1.0, np.abs(rhs).max())
        # FISTA vs the orthonormal-design closed form
        for _ in range(20):
            q, _ = np.linalg.qr(random_complex(rng, 12, 6))
            r = random_complex(rng, 12)
            beta = float(0.4 * np.max(np.abs(q.conj().T @ r)))
            problem = LassoProblem(r[:, None], q, np.array([[1.0]]),
                                   beta_path=[beta], max_iters=5000, kkt_tol=1e-10)
            res = fista_solve(problem, beta)
            closed = soft_threshold_complex(q.conj().T @ r, beta / 2)
            assert np.abs(res.coefficients - closed).max() <= 1e-8
        # FISTA vs an independent convex-solver oracle
        cvxpy = pytest.importorskip("cvxpy")
        for _ in range(20):
            a = random_complex(rng, 8, 6)
            r = random_complex(rng, 8)
            beta = float(0.5 * np.max(np.abs(a.conj().T @ r)))
            problem = LassoProblem(r[:, None], a, np.array([[1.0]]),
                                   beta_path=[beta], max_iters=20000, kkt_tol=1e-9)
            res = fista_solve(problem, beta)
            gvar = cvxpy.Variable(6, complex=True)
            cost = cvxpy.sum_squares(a @ gvar - r) + beta * cvxpy.norm1(gvar)
            cvxpy.Problem(cvxpy.Minimize(cost)).solve(solver="CLARABEL")
            ours = np.linalg.norm(a @ res.coefficients - r) ** 2 \
                + beta * np.abs(res.coefficients).sum()
            oracle = np.linalg.norm(a @ gvar.value - r) ** 2 \
                + beta * np.abs(gvar.value).sum()
            assert abs(ours - oracle) <= 1e-6 * max(1.0, oracle)
        elapsed = time.time() - t0
        assert elapsed < 30
        report("numerics suite (eig 1e-9, kron 1e-12, fista 1e-8/1e-6)", elapsed)


class TestNoiselessEndToEnd:
    def test_criterion_noiseless(self, paper_codebook):
        t0 = time.time()
        cfg = PhysicalConfig(noise_psd_w_per_hz=1e-300)  # zero-noise limit
        config = CampaignConfig(physical=cfg, strategies=("sweep",), l_list=(36,),
                                num_geometries=50, num_realizations=1,
                                master_seed=MASTER_SEED, genie_delays=False,
                                output_dir="unused", solver=SolverKnobs(), jobs=1)
        t_sym = cfg.symbol_duration_s
        step = t_sym / (16 * cfg.num_subcarriers)
        for g in range(50):
            out = _run_trial_variants(config, paper_codebook, 0, 36, g, 0)[0]
            assert out.p_md == 0.0 and out.p_fa == 0.0, f"geometry {g}: md={out.p_md}"
            assert out.delay_err_max_s < step, f"geometry {g}: delay err too large"
        elapsed = time.time() - t0
        assert elapsed < 120
        report("noiseless end-to-end (50/50 perfect, delay < T/(16 N_s))", elapsed)


class TestPepClosedForm:
    def test_criterion_pep_monte_carlo(self):
        t0 = time.time()
        rng = np.random.default_rng(MASTER_SEED)
        t_sym = 36 / 160e6
        for trial in range(20):
            delays = np.sort(rng.uniform(0, t_sym, 3))
            schedule = make_schedule("random", 8, 5, rng)
            q_true = tuple(rng.uniform(0, 1, 8) for _ in range(3))
            q_hat = tuple(np.clip(q + rng.uniform(-0.3, 0.3, 8), 0, None)
                          for q in q_true)
            instance = PepInstance(delays_s=delays, schedule=schedule,
                                   gain_variances=rng.uniform(0.5, 2.0, 3),
                                   q_true=q_true, q_hat=q_hat)
            mat = squared_difference_matrix(instance, 36, t_sym)
            lam = np.clip(np.sort(np.linalg.eigvalsh(mat))[::-1], 0, None)
            n0 = lam[0] / (2.0 * rng.uniform(0.3, 3.0))
            rep = pep_report(instance, n0, 36, t_sym)
            h_sq = 2.0 * rng.exponential(size=(100_000, rep.rank))
            mc = float(np.mean(np.exp(-(h_sq @ lam[:rep.rank]) / (4.0 * n0))))
            assert abs(rep.bound_product - mc) <= 0.02 * mc, f"instance {trial}"
        elapsed = time.time() - t0
        assert elapsed < 60
        report("PEP closed form vs 1e5-draw Monte Carlo (2%)", elapsed)


class TestRankGeomeanTrends:
    def test_criterion_rank_trend(self, pep_campaign):
        t0 = time.time()
        rows = pep_campaign["rows"]
        mean_rank = {}
        for strategy in ("sweep", "random"):
            for l_slots in (6, 18, 36):
                vals = [r["rank"] for r in rows[strategy] if r["L"] == l_slots]
                mean_rank[strategy, l_slots] = float(np.mean(vals))
        assert mean_rank["sweep", 6] < mean_rank["sweep", 18] < mean_rank["sweep", 36]
        rnd = [mean_rank["random", l] for l in (6, 18, 36)]
        spread = (max(rnd) - min(rnd)) / max(rnd)
        assert spread < 0.15, f"random mean rank varies {spread:.1%} across L"
        gap = abs(mean_rank["sweep", 36] - mean_rank["random", 36]) \
            / max(mean_rank["sweep", 36], mean_rank["random", 36])
        assert gap < 0.10, f"strategies disagree {gap:.1%} at L=36"
        elapsed = time.time() - t0 + pep_campaign["elapsed"]
        assert elapsed < 300
        detail = (f"sweep ranks {mean_rank['sweep', 6]:.2f}<"
                  f"{mean_rank['sweep', 18]:.2f}<{mean_rank['sweep', 36]:.2f}, "
                  f"random spread {spread:.1%}, L=36 gap {gap:.1%}")
        report("rank trend (sweep grows with L, random steady)", elapsed, detail)

    def test_criterion_geomean_trend(self, pep_campaign):
        rows = pep_campaign["rows"]
        medians = {}
        for strategy in ("sweep", "random"):
            vals = [r["geomean"] for r in rows[strategy]
                    if r["L"] == 36 and r["geomean"] is not None]
            medians[strategy] = float(np.median(vals))
        assert medians["sweep"] > medians["random"]
        report("geomean trend (sweep > random at L=36)", 0.0,
               f"medians {medians['sweep']:.3e} vs {medians['random']:.3e}")


def two_sided_gap(cells, strategy_lo, strategy_hi, l_slots, metric):
    lo = cells[(strategy_lo, l_slots, 0)]
    hi = cells[(strategy_hi, l_slots, 0)]
    diff = hi[f"p_{metric}_mean"] - lo[f"p_{metric}_mean"]
    se = math.hypot(lo[f"p_{metric}_stderr"], hi[f"p_{metric}_stderr"])
    return diff, se


class TestCrossover:
    def test_criterion_crossover(self, campaign):
        cells = campaign["cells"]
        for metric in ("md", "fa"):
            for l_slots in (6, 18):
                diff, se = two_sided_gap(cells, "random", "sweep", l_slots, metric)
                assert diff >= 2 * se, \
                    f"P_{metric}: random not better than sweep at L={l_slots} " \
                    f"(diff {diff:.4f}, se {se:.4f})"
            sweep48 = cells[("sweep", 48, 0)][f"p_{metric}_mean"]
            random48 = cells[("random", 48, 0)][f"p_{metric}_mean"]
            assert sweep48 <= random48, \
                f"P_{metric}: sweep ({sweep48}) worse than random ({random48}) at L=48"
        d6, s6 = two_sided_gap(cells, "random", "sweep", 6, "md")
        d18, s18 = two_sided_gap(cells, "random", "sweep", 18, "md")
        report("crossover (random wins small L, sweep wins L=48)",
               campaign["elapsed"],
               f"MD gaps: L=6 {d6:.3f} ({d6 / s6:.1f} se), L=18 {d18:.3f} "
               f"({d18 / s18:.1f} se)")

    def test_criterion_genie_bound(self, campaign):
        cells = campaign["cells"]
        for (strategy, l_slots) in [(s, l) for s in ("sweep", "random")
                                    for l in (6, 18, 36, 48)]:
            stage2 = cells[(strategy, l_slots, 0)]
            genie = cells[(strategy, l_slots, 1)]
            slack = 2 * math.hypot(stage2["p_md_stderr"], genie["p_md_stderr"])
            assert stage2["p_md_mean"] >= genie["p_md_mean"] - slack, \
                f"{strategy} L={l_slots}: two-stage beats genie beyond noise"
        for strategy in ("sweep", "random"):
            stage2 = cells[(strategy, 48, 0)]["p_md_mean"]
            genie = cells[(strategy, 48, 1)]["p_md_mean"]
            assert (stage2 <= 3 * genie) or (stage2 < 1e-3 and genie < 1e-3), \
                f"{strategy} L=48: two-stage gap vs genie too large " \
                f"({stage2} vs {genie})"
        report("genie bound (two-stage >= genie - 2 se; L=48 gap bounded)", 0.0)


class TestDeterminism:
    def test_criterion_byte_identical(self, tmp_path, paper_codebook):
        t0 = time.time()
        base = dict(physical=PhysicalConfig(), strategies=("sweep", "random"),
                    l_list=(6,), num_geometries=2, num_realizations=2,
                    master_seed=MASTER_SEED, genie_delays=True,
                    solver=CAMPAIGN_KNOBS)
        runs = {}
        for tag, jobs in (("a", 1), ("b", 1), ("c", 8)):
            config = CampaignConfig(output_dir=str(tmp_path / tag), jobs=jobs, **base)
            paths = run_campaign(config, cb=paper_codebook)
            runs[tag] = (open(paths.md_fa_csv, "rb").read(),
                         open(paths.trials_csv, "rb").read())
        assert runs["a"] == runs["b"], "rerun with same seed differs"
        assert runs["a"] == runs["c"], "jobs=1 vs jobs=8 differ"
        report("determinism (rerun and jobs=1 vs jobs=8 byte-identical)",
               time.time() - t0)
