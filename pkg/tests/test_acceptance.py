"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line."""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from netmpg import checks, oracle
from netmpg.actor import default_beta, ipg_exact
from netmpg.critic import collect_trajectory, make_features, restrict, td_functional, generalized_td
from netmpg.game import build_chain_example, random_game
from netmpg.graph import Graph
from netmpg.harness import read_regret_csv, run_batch, run_experiment
from netmpg.policy import epsilon_explore, softmax_profile
from netmpg.regret import RegretSeries, avg_nash_regret, sandwich_violation
from netmpg.subchain import build_subchain, td0_fixed_point

from conftest import random_theta

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def verdict(capsys):
    def emit(number, passed, detail):
        with capsys.disabled():
            print(f"\ncriterion {number}: {'PASS' if passed else 'FAIL'} {detail}")
        assert passed, detail

    return emit


def test_criterion_01_chain_closed_form(verdict):
    t0 = time.perf_counter()
    worst_anchor, worst_zero = 0.0, 0.0
    for gamma in (0.5, 0.9, 0.99):
        table = checks.chain_f_table(gamma)
        worst_anchor = max(worst_anchor, abs(table["gg"] - gamma ** 4 / (1 - gamma)))
        worst_zero = max(worst_zero, *(abs(table[k]) for k in ("gb", "bg", "bb")))
    elapsed = time.perf_counter() - t0
    ok = worst_anchor <= 1e-10 and worst_zero <= 1e-10 and elapsed < 1.0
    verdict(1, ok, f"anchor err {worst_anchor:.2e}, zero-entry err {worst_zero:.2e}, {elapsed:.2f}s")


def test_criterion_02_gradient_finite_differences(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    h = 1e-6
    worst = 0.0
    for _ in range(20):
        game = random_game(Graph.path(3), gamma=0.9, rng=rng)
        theta = random_theta(game, rng)
        for i in range(3):
            g = oracle.exact_policy_gradient(game, theta, i)
            fd = np.zeros_like(g)
            for idx in np.ndindex(*g.shape):
                tp = [t.copy() for t in theta]
                tm = [t.copy() for t in theta]
                tp[i][idx] += h
                tm[i][idx] -= h
                fd[idx] = (oracle.objective(game, softmax_profile(tp), i)
                           - oracle.objective(game, softmax_profile(tm), i)) / (2 * h)
            worst = max(worst, np.linalg.norm(g - fd) / np.linalg.norm(g))
    elapsed = time.perf_counter() - t0
    verdict(2, worst <= 1e-5 and elapsed < 30, f"max relative error {worst:.2e}, {elapsed:.1f}s")


def test_criterion_03_performance_difference(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(50):
        game = random_game(Graph.path(3), gamma=float(rng.uniform(0.5, 0.95)), rng=rng)
        theta = random_theta(game, rng, 2.0)
        i = int(rng.integers(3))
        new = [t.copy() for t in theta]
        new[i] = 2.0 * rng.standard_normal(new[i].shape)
        lhs = oracle.objective(game, softmax_profile(new), i) - oracle.objective(game, softmax_profile(theta), i)
        worst = max(worst, abs(lhs - oracle.performance_difference(game, theta, new, i)))
    elapsed = time.perf_counter() - t0
    verdict(3, worst <= 1e-9 and elapsed < 30, f"max identity error {worst:.2e}, {elapsed:.1f}s")


def test_criterion_04_exponential_decay(verdict):
    t0 = time.perf_counter()
    res = checks.check_decay(seed=4)
    elapsed = time.perf_counter() - t0
    ok = res["passed"] and elapsed < 60
    verdict(4, ok, f"max gap/bound {res['worst_gap_over_bound']:.3f}, gap at diameter "
                   f"{res['gap_at_diameter']:.1e}, {elapsed:.1f}s")


def test_criterion_05_subchain(verdict):
    t0 = time.perf_counter()
    res = checks.check_subchain(seed=5)
    elapsed = time.perf_counter() - t0
    per = res["per_agent"].values()
    marg = max(r["checks"]["stationary_marginal"]["max_error"] for r in per)
    local = max(r["checks"]["local_conditionals"]["max_error"] for r in per)
    ok = res["passed"] and elapsed < 60
    verdict(5, ok, f"marginal err {marg:.1e}, local-conditional err {local:.1e}, "
                   f"max cost gap {res['max_cost_gap']:.3f}, {elapsed:.1f}s")


def test_criterion_06_td_fixed_point(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    game = random_game(Graph.path(2), gamma=0.9, rng=rng)
    profile = softmax_profile(random_theta(game, rng))
    mixed = epsilon_explore(profile, 0.1)
    kc = game.graph.diameter
    feats = [make_features(game, i, kc, "tabular") for i in range(2)]
    fixed, fp_err = [], 0.0
    for i in range(2):
        sub = build_subchain(game, mixed, i, kc, rescale=False)
        fp = td0_fixed_point(sub, feats[i].matrix())
        Qbar = oracle.solve(game, mixed, i).Qbar.reshape(-1)
        fp_err = max(fp_err, float(np.max(np.abs((feats[i].matrix() @ fp.w)[sub.project] - Qbar))), fp.eps_red)
        fixed.append(fp.w)
    K_short, K_long = 50_000, 200_000
    short, long, final_max = [[], []], [[], []], 0.0
    for seed in range(5):
        traj = collect_trajectory(game, profile, 0.1, K_long, np.random.default_rng(seed))
        for i in range(2):
            rt = restrict(traj, i, feats[i].hood)
            F = td_functional(feats[i], game.gamma)
            w_s = generalized_td(rt, feats[i], F, 0.0, 0, 0.01, K=K_short)
            w_l = generalized_td(rt, feats[i], F, 0.0, 0, 0.01, K=K_long)
            short[i].append(np.linalg.norm(w_s - fixed[i]))
            long[i].append(np.linalg.norm(w_l - fixed[i]))
            final_max = max(final_max, float(np.max(np.abs(w_l - fixed[i]))))
    med_s = [float(np.median(x)) for x in short]
    med_l = [float(np.median(x)) for x in long]
    elapsed = time.perf_counter() - t0
    ok = (fp_err <= 1e-9 and all(b < a for a, b in zip(med_s, med_l))
          and final_max <= 0.05 / (1 - game.gamma) and elapsed < 300)
    verdict(6, ok, f"fixed-point err {fp_err:.1e}, median |w-w*| per agent "
                   f"{' '.join(f'{a:.3f}->{b:.3f}' for a, b in zip(med_s, med_l))}, "
                   f"max entry err {final_max:.3f}, {elapsed:.0f}s")


def test_criterion_07_mixing_perturbation(verdict):
    t0 = time.perf_counter()
    res = checks.check_mixing(seed=7)
    elapsed = time.perf_counter() - t0
    verdict(7, res["passed"] and elapsed < 60,
            f"max |dQbar| {res['max_difference']:.3f}, worst ratio to bound "
            f"{res['worst_difference_over_bound']:.4f}, {elapsed:.1f}s")


def test_criterion_08_congestion_potentials(verdict):
    t0 = time.perf_counter()
    res = checks.check_potentials(seed=8)
    elapsed = time.perf_counter() - t0
    verdict(8, res["passed"] and elapsed < 120,
            f"stage violation {res['stage_violation']:.1e}, value violation {res['value_violation']:.1e}, "
            f"{elapsed:.1f}s")


@pytest.mark.slow
def test_criterion_09_exact_ipg_convergence(verdict):
    t0 = time.perf_counter()
    game, _ = build_chain_example(0.9)
    beta = default_beta(game, 1, "exact")
    M, stride = 5000, 10
    rng = np.random.default_rng(9)
    steps, gaps = [], []

    def evaluate(m, theta):
        if m % stride == 0:
            steps.append(m)
            gaps.append(oracle.ne_gap_report(game, softmax_profile(theta), restarts=5, steps=500, rng=rng).gaps)

    ipg_exact(game, [np.zeros((2, 2))] * 4, beta, M, callback=evaluate)
    series = RegretSeries(np.array(gaps), np.array(steps))
    final_gap = float(series.gaps[-1].max())
    quarter = int(np.searchsorted(series.steps, M // 4, side="right"))
    ratio = avg_nash_regret(series) / avg_nash_regret(series, M=quarter)
    elapsed = time.perf_counter() - t0
    ok = final_gap < 1e-2 and ratio <= 0.7 and elapsed < 600
    verdict(9, ok, f"beta {beta:.3e}, final global gap {final_gap:.4f}, ANR(M)/ANR(M/4) {ratio:.3f}, "
                   f"{elapsed:.0f}s")


@pytest.mark.slow
def test_criterion_10_appendix_a_reproduction(verdict, tmp_path):
    t0 = time.perf_counter()
    cfg = json.loads((CONFIGS / "appendix_a.json").read_text())
    _, dirs = run_batch(cfg, list(range(10)), tmp_path)
    curves = []
    for d in dirs:
        steps, gaps = read_regret_csv(d / "regret.csv")
        curves.append(RegretSeries(gaps, steps).avg_prefix())
    curve = np.mean(curves, axis=0)
    tenth = max(1, len(curve) // 10)
    early, late = float(curve[:tenth].max()), float(curve[-tenth:].mean())
    elapsed = time.perf_counter() - t0
    ok = late < 0.25 * early and elapsed < 1800
    verdict(10, ok, f"mean ANR late {late:.4f} vs 0.25 x early max {0.25 * early:.4f}, {elapsed:.0f}s")


def test_criterion_11_regret_sandwich(verdict, tmp_path):
    t0 = time.perf_counter()
    res = checks.check_regret_sandwich(seed=11)
    worst = res["max_violation"]
    for seed in (0, 1):
        d = run_experiment({"game": {"type": "chain", "gamma": 0.9}, "algorithm": "ipg",
                            "actor": {"M": 100, "beta": 0.5}, "evaluation": {"stride": 10, "restarts": 2}},
                           seed, tmp_path)
        steps, gaps = read_regret_csv(d / "regret.csv")
        worst = max(worst, sandwich_violation(RegretSeries(gaps, steps)))
    elapsed = time.perf_counter() - t0
    verdict(11, worst <= 1e-12 and elapsed < 5, f"max violation {worst:.1e}, {elapsed:.1f}s")


def test_criterion_12_determinism(verdict, tmp_path):
    lac = json.loads((CONFIGS / "appendix_a.json").read_text())
    lac["actor"].update(M=20)
    lac["evaluation"].update(stride=10, restarts=1, steps=50)
    ipg = {"game": {"type": "chain", "gamma": 0.9}, "algorithm": "ipg", "actor": {"M": 50, "beta": 0.5},
           "evaluation": {"stride": 10, "restarts": 3}}
    same = True
    for name, cfg in (("lac", lac), ("ipg", ipg)):
        a = run_experiment(cfg, 3, tmp_path / name / "a") / "regret.csv"
        b = run_experiment(cfg, 3, tmp_path / name / "b") / "regret.csv"
        same &= a.read_bytes() == b.read_bytes()
    for name in checks.SUITES:
        first = json.dumps(checks.run_suite(name), sort_keys=True, default=float)
        same &= first == json.dumps(checks.run_suite(name), sort_keys=True, default=float)
    verdict(12, same, "regret CSV bytes and check-suite outputs identical across two executions"
            if same else "outputs differ between executions")
