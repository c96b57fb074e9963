"""Acceptance criteria, one test per criterion.

Each test prints a ``[PASS]``/``[FAIL]`` line (also collected into the pytest
terminal summary). Run standalone with ``python tests/test_acceptance.py``.

Criterion 9 needs real NHL results: point ``SKFRATING_NHL_DIR`` at a folder of
canonical season CSVs (2005/06 to 2014/15 without 2012/13). Without it the
bundled golden season stands in.
"""
from __future__ import annotations

import csv
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from skfrating.engines import Algorithm, EngineConfig, init, iterate, step
from skfrating.evaluation import entropy, estimate_davidson_params, estimate_hfa_binary, evaluate_seasons
from skfrating.ingest import parse_season
from skfrating.models import ModelKind, ModelSpec, davidson_expected_score, derivatives, log_likelihood, logistic10
from skfrating.projection import gaussian_kl, project_to_diagonal, project_to_scalar
from skfrating.schedule import DynamicsParams, GameRecord
from skfrating.synthetic import SyntheticConfig, run_experiment

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run
    ACCEPTANCE_LINES = []

DATA = Path(__file__).parent / "data"
TH = ModelSpec(ModelKind.THURSTON)
BT = ModelSpec(ModelKind.BRADLEY_TERRY)


def report(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} | {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def random_games(rng, M, T, F=1):
    out = []
    for t in range(T):
        p = rng.permutation(M)
        out.append(GameRecord(t + 1, t // 4, tuple(int(i) for i in p[:F]),
                              tuple(int(i) for i in p[F:2 * F]), int(rng.integers(2))))
    return out


# 1 ---------------------------------------------------------------------------

def test_criterion_1_gradient_hessian_consistency():
    models = [TH, BT] + [ModelSpec(ModelKind.DAVIDSON, kappa=k) for k in (0.5, 1.0, 2.0)]
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst_g = worst_h = 0.0
    for m in models:
        z = rng.uniform(-3, 3, 1000)
        y = rng.integers(m.n_outcomes, size=1000)
        d = derivatives(m, z, y)
        h1, h2 = 1e-5, 1e-4
        g_fd = (log_likelihood(m, z + h1, y) - log_likelihood(m, z - h1, y)) / (2 * h1)
        d2_fd = (log_likelihood(m, z + h2, y) - 2 * log_likelihood(m, z, y)
                 + log_likelihood(m, z - h2, y)) / h2 ** 2
        worst_g = max(worst_g, np.max(np.abs(d.gradient - g_fd)))
        worst_h = max(worst_h, np.max(np.abs(d.hessian_neg + d2_fd)))
    elapsed = time.perf_counter() - start
    ok = worst_g <= 1e-6 and worst_h <= 1e-4 and elapsed < 1.0
    report(1, "g/h match finite differences", ok,
           f"max|dg|={worst_g:.2e} (<=1e-6), max|dh|={worst_h:.2e} (<=1e-4), {elapsed:.3f}s (<1s)")


# 2 ---------------------------------------------------------------------------

def test_criterion_2_model_identities():
    z = np.linspace(-5, 5, 200)
    e0 = np.max(np.abs(logistic10(z) - davidson_expected_score(z / 2, 0.0)))
    e2 = np.max(np.abs(davidson_expected_score(z, 2.0) - logistic10(z)))
    report(2, "Davidson reduces to logistic at kappa 0 and 2", max(e0, e2) <= 1e-12,
           f"kappa=0 err={e0:.1e}, kappa=2 err={e2:.1e} (<=1e-12)")


# 3 ---------------------------------------------------------------------------

def test_criterion_3_projection_oracle():
    rng = np.random.default_rng(103)
    worst, beaten = 0.0, True
    for _ in range(50):
        M = int(rng.integers(1, 6))
        A = rng.standard_normal((M, M))
        V = A @ A.T + 0.05 * np.eye(M)
        d = project_to_diagonal(V)
        for m in range(M):
            res = minimize_scalar(lambda v: 0.5 * (np.log(v) + V[m, m] / v), bounds=(1e-8, 1e3),
                                  method="bounded", options={"xatol": 1e-12})
            worst = max(worst, abs(res.x - d[m]))
        s = project_to_scalar(d)
        res = minimize_scalar(lambda v: 0.5 * M * np.log(v) + d.sum() / (2 * v), bounds=(1e-8, 1e3),
                              method="bounded", options={"xatol": 1e-12})
        worst = max(worst, abs(res.x - s))
        kl_d = gaussian_kl(V, np.diag(d))
        kl_s = gaussian_kl(np.diag(d), s * np.eye(M))
        for m in range(M):
            for delta in (-1e-2, 1e-2):
                p = d.copy()
                p[m] += delta
                beaten &= gaussian_kl(V, np.diag(p)) > kl_d
        for delta in (-1e-2, 1e-2):
            beaten &= gaussian_kl(np.diag(d), (s + delta) * np.eye(M)) > kl_s
    report(3, "closed-form projections are KL minimizers", worst <= 1e-6 and beaten,
           f"max|closed-numeric|={worst:.1e} (<=1e-6), beats all +/-1e-2 perturbations={beaten}")


# 4 ---------------------------------------------------------------------------

def test_criterion_4_scale_invariance():
    rng = np.random.default_rng(104)
    games = random_games(rng, 10, 200)
    s = 400.0
    dyn1, dyn_s = DynamicsParams(0.999, 0.004), DynamicsParams(0.999, 0.004 * s * s)
    pairs = {
        "kf": ({"v0": 0.8}, {"v0": 0.8 * s * s}),
        "vskf": ({"v0": 0.8}, {"v0": 0.8 * s * s}),
        "sskf": ({"v0": 0.8}, {"v0": 0.8 * s * s}),
        "fskf": ({"v_bar": 0.05}, {"v_bar": 0.05 * s * s}),
        "sg": ({"step_K": 0.05}, {"step_K": 0.05}),
    }
    worst = 0.0
    for alg, (kw1, kws) in pairs.items():
        c1 = EngineConfig(Algorithm(alg), BT, dyn1, **kw1)
        cs = EngineConfig(Algorithm(alg), BT.with_scale(s), dyn_s if alg != "sg" else dyn1, **kws)
        for (_, _, a), (_, _, b) in zip(iterate(c1, games, 10), iterate(cs, games, 10)):
            worst = max(worst, np.max(np.abs(b.mu - s * a.mu) / np.maximum(np.abs(s * a.mu), 1e-300)))
            if a.cov is not None and alg != "fskf":
                worst = max(worst, np.max(np.abs(b.cov - s * s * a.cov) / np.maximum(s * s * np.abs(a.cov), 1e-300)))
    report(4, "scale invariance s=400 (kf, vskf, sskf, fskf, sg)", worst <= 1e-9,
           f"max relative deviation={worst:.1e} (<=1e-9)")


# 5 ---------------------------------------------------------------------------

def test_criterion_5_first_step_equivalence():
    rng = np.random.default_rng(105)
    worst = 0.0
    for _ in range(100):
        M = int(rng.integers(2, 9))
        F = int(rng.integers(1, M // 2 + 1))
        g = random_games(rng, M, 1, F)[0]
        model = [TH, BT, ModelSpec(ModelKind.BRADLEY_TERRY, hfa=0.1)][int(rng.integers(3))]
        v0 = float(rng.uniform(0.05, 3))
        kf = EngineConfig(Algorithm.KF, model, DynamicsParams(1.0, 0.01), v0=v0)
        vs = EngineConfig(Algorithm.VSKF, model, DynamicsParams(1.0, 0.01), v0=v0)
        a, b = step(init(kf, M), g, kf), step(init(vs, M), g, vs)
        worst = max(worst, np.max(np.abs(a.mu - b.mu)), np.max(np.abs(np.diag(a.cov) - b.cov)))
    report(5, "kf and vskf agree on the first step", worst <= 1e-12, f"max diff={worst:.1e} (<=1e-12)")


# 6 ---------------------------------------------------------------------------

def test_criterion_6_synthetic_switch():
    synth = SyntheticConfig(M=20, D=100, sigma_obs=1.0, switch_day=40, switch_count=5, replicates=1000, seed=6)
    dyn = DynamicsParams(1.0, 0.004)
    engines = {
        "kf": EngineConfig(Algorithm.KF, TH, dyn, v0=1.0),
        "vskf": EngineConfig(Algorithm.VSKF, TH, dyn, v0=1.0),
        "glicko": EngineConfig(Algorithm.GLICKO, BT, DynamicsParams(1.0, 0.002), v0=0.5, sigma=1.0),
    }
    start = time.perf_counter()
    res = run_experiment(synth, engines, metric="kl")
    elapsed = time.perf_counter() - start
    kf, vs, gl = (res.series[k].mean for k in ("kf", "vskf", "glicko"))
    days = np.arange(1, 101)

    diff_a = np.max(np.abs(vs - kf)[days > 10])

    def spike_then_decay(m):
        d = lambda k: m[k - 1]  # noqa: E731  1-based day
        peak = d(41) > d(40) and d(41) > d(42)
        falling = all(d(k) > d(k + 1) for k in range(41, 45))
        settled = m[80:100].mean() < m[41:50].mean()
        return peak and falling and settled

    ok_b = spike_then_decay(kf) and spike_then_decay(vs)
    diff_c = np.max(np.abs(gl - vs)[days > 20])
    ok = diff_a < 0.01 and ok_b and diff_c < 0.015 and elapsed < 120
    report(6, "synthetic switch scenario (1000 replicates)", ok,
           f"(a) max|vskf-kf| d>10={diff_a:.4f} (<0.01); (b) peak at d=41 then decay={ok_b} "
           f"[kf d40..42={kf[39]:.4f},{kf[40]:.4f},{kf[41]:.4f}]; "
           f"(c) max|glicko-vskf| d>20={diff_c:.4f} (<0.015); {elapsed:.1f}s")


# 7 ---------------------------------------------------------------------------

def test_criterion_7_noise_saturation():
    sigma = 8.0
    synth = SyntheticConfig(M=20, D=100, sigma_obs=sigma, replicates=1000, seed=7)
    th = TH.with_scale(sigma)
    engines = {
        "vskf": EngineConfig(Algorithm.VSKF, th, DynamicsParams(1.0, 0.004), v0=1.0),
        # v_bar = K s^2 = 0.15 sigma, i.e. K = 0.15 / sigma
        "sg": EngineConfig(Algorithm.SG, th, step_K=0.15 / sigma),
    }
    res = run_experiment(synth, engines, metric="log_score")
    vs, sg = res.series["vskf"].mean, res.series["sg"].mean
    late = np.arange(1, 101) > 20
    d_engines = np.max(np.abs(vs - sg)[late])
    d_h = max(np.max(np.abs(vs - math.log(2))[late]), np.max(np.abs(sg - math.log(2))[late]))
    report(7, "noise saturation at sigma=8", d_engines < 0.01 and d_h < 0.02,
           f"max|vskf-sg| d>20={d_engines:.4f} (<0.01); max|LS-ln2| d>20={d_h:.4f} (<0.02)")


# 8 ---------------------------------------------------------------------------

def test_criterion_8_estimators():
    eta_b = estimate_hfa_binary((0.45, 0.55))
    eta, kappa = estimate_davidson_params((0.33, 0.24, 0.43))
    h = entropy((0.5, 0.5))
    ok = abs(eta_b - 0.0872) <= 1e-4 and 0.05 <= eta <= 0.06 and 0.62 <= kappa <= 0.65 and h == math.log(2)
    report(8, "frequency estimators", ok,
           f"eta_bin={eta_b:.5f}; eta={eta:.4f} in [0.05,0.06]; kappa={kappa:.4f} in [0.62,0.65]; H==ln2: {h == math.log(2)}")


# 9 ---------------------------------------------------------------------------

def test_criterion_9_golden_season():
    season = parse_season(DATA / "golden_season.csv", "binary_final")
    cfg = EngineConfig(Algorithm.VSKF, ModelSpec(ModelKind.BRADLEY_TERRY, hfa=0.08),
                       DynamicsParams(1.0, 3e-5), v0=0.01)
    expected = {}
    with open(DATA / "golden_expected.csv", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            expected[(row["kind"], row["key"])] = float(row["value"])
    from skfrating.evaluation import season_log_scores
    scores = season_log_scores(cfg, season.games, season.M)
    final = [s for _, _, s in iterate(cfg, season.games, season.M)][-1]
    worst = max(abs(scores[t - 1] - expected[("log_score", str(t))]) for t in range(1, 21))
    for name, m in season.team_index.items():
        worst = max(worst, abs(final.mu[m] - expected[("mu", name)]),
                    abs(final.cov[m] - expected[("variance", name)]))
    report(9, "golden 20-game season vs standalone oracle", worst <= 1e-12, f"max deviation={worst:.1e} (<=1e-12)")


NHL_DIR = os.environ.get("SKFRATING_NHL_DIR")


@pytest.mark.skipif(not NHL_DIR, reason="set SKFRATING_NHL_DIR to NHL season CSVs to run")
def test_criterion_9_nhl_table():
    files = sorted(Path(NHL_DIR).glob("*.csv"))
    seasons = [parse_season(f, "binary_final") for f in files]
    cfg = EngineConfig(Algorithm.VSKF, ModelSpec(ModelKind.BRADLEY_TERRY, hfa=0.08),
                       DynamicsParams(1.0, 3e-5), v0=0.01)
    ls_init, ls_final = evaluate_seasons(cfg, seasons)
    ok = abs(ls_init - 0.688) <= 0.005 and abs(ls_final - 0.678) <= 0.005
    report(9, f"NHL table ({len(files)} seasons)", ok,
           f"LS_init={ls_init:.4f} (0.688+/-0.005), LS_final={ls_final:.4f} (0.678+/-0.005)")


# 10 --------------------------------------------------------------------------

def _cli(*args, cwd):
    return subprocess.run([sys.executable, "-m", "skfrating.cli", *args], cwd=cwd,
                          capture_output=True, text=True, check=True)


def _tree(path: Path) -> dict:
    return {p.relative_to(path).as_posix(): p.read_bytes() for p in sorted(path.rglob("*")) if p.is_file()}


def test_criterion_10_determinism(tmp_path):
    _cli("simulate", "--M", "8", "--D", "20", "--replicates", "30", "--switch-day", "8",
         "--switch-count", "2", "--engines", "kf:eps=0.004,v0=1", "vskf:eps=0.004,v0=1", "sg:K=0.1",
         "--seed", "7", "--out", "sim1", cwd=tmp_path)
    _cli("simulate", "--config", "sim1/manifest.txt", "--out", "sim2", cwd=tmp_path)
    _cli("simulate", "--config", "sim1/manifest.txt", "--workers", "2", "--out", "sim3", cwd=tmp_path)
    golden = str(DATA / "golden_season.csv")
    _cli("evaluate", "--seasons", golden, "--engines", "vskf:v0=0.01,eps=3e-5", "sg:K=0.01", "freq",
         "--out", "ev1", cwd=tmp_path)
    _cli("evaluate", "--config", "ev1/manifest.txt", "--out", "ev2", cwd=tmp_path)
    _cli("rate", "--season", golden, "--engines", "kf:v0=0.01,eps=3e-5", "--export-covariance",
         "--out", "r1", cwd=tmp_path)
    _cli("rate", "--config", "r1/manifest.txt", "--out", "r2", cwd=tmp_path)
    t = {k: _tree(tmp_path / k) for k in ("sim1", "sim2", "sim3", "ev1", "ev2", "r1", "r2")}
    sim3 = {k: v for k, v in t["sim3"].items() if k != "manifest.txt"}
    sim1 = {k: v for k, v in t["sim1"].items() if k != "manifest.txt"}
    ok = t["sim1"] == t["sim2"] and sim1 == sim3 and t["ev1"] == t["ev2"] and t["r1"] == t["r2"]
    n = sum(len(v) for v in t.values())
    report(10, "manifest reruns are byte-identical", ok,
           f"{n} files compared across simulate/evaluate/rate (and 1 vs 2 workers)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
