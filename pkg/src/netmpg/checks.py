"""Invariant batteries on fixed micro-fixtures, driven by ``netmpg check``."""

from __future__ import annotations

import itertools

import numpy as np

from . import oracle
from .congestion import value_potential_congestion
from .critic import make_features
from .game import (CongestionGame, TrafficNetwork, build_chain_example, random_game,
                   stage_potential_congestion)
from .graph import Graph
from .policy import PolicyProfile, epsilon_explore, softmax_profile
from .regret import RegretSeries, sandwich_violation
from .subchain import build_subchain, subchain_checks, td0_fixed_point


def _random_theta(game, rng, scale=1.0):
    return [scale * rng.standard_normal((game.n_states[i], game.n_actions[i])) for i in range(game.n)]


def _result(name, violation, passed, **extra):
    return {"suite": name, "passed": bool(passed), "max_violation": float(violation), **extra}


def check_decay(seed=0):
    rng = np.random.default_rng(seed)
    worst_ratio, zero_err = 0.0, 0.0
    for kappa_r, gamma in itertools.product((0, 1), (0.5, 0.9)):
        game = random_game(Graph.path(4), kappa_r=kappa_r, gamma=gamma, rng=rng)
        theta = _random_theta(game, rng)
        diam = game.graph.diameter
        for i in range(game.n):
            for kc in range(diam + 1):
                gap = oracle.decay_gap(game, theta, i, kc)
                worst_ratio = max(worst_ratio, gap / oracle.decay_bound(gamma, kc, kappa_r))
            zero_err = max(zero_err, oracle.decay_gap(game, theta, i, diam))
    return _result("decay", max(worst_ratio - 1.0, zero_err, 0.0), worst_ratio <= 1.0 and zero_err <= 1e-10,
                   worst_gap_over_bound=worst_ratio, gap_at_diameter=zero_err)


def check_subchain(seed=0):
    rng = np.random.default_rng(seed)
    game = random_game(Graph.path(3), kappa_r=0, gamma=0.9, rng=rng)
    mixed = epsilon_explore(softmax_profile(_random_theta(game, rng)), 0.2)
    reports = {}
    for i in range(game.n):
        sub = build_subchain(game, mixed, i, 1)
        reports[i] = subchain_checks(game, mixed, sub).to_dict()
    passed = all(r["passed"] for r in reports.values())
    worst = max(r["checks"]["cost_gap"]["gap"] for r in reports.values())
    return _result("subchain", 0.0 if passed else 1.0, passed, max_cost_gap=worst, per_agent=reports)


def micro_congestion(gamma=0.9, eps_bar=0.5):
    """Two agents, four nodes: both travel a -> d through b or c."""
    net = TrafficNetwork(("a", "b", "c", "d"), (("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")))
    return CongestionGame(net, [("a", "d"), ("a", "d")], eps_bar, gamma)


def check_potentials(seed=0):
    rng = np.random.default_rng(seed)
    game = micro_congestion()
    dm = game.dense
    stage = 0.0
    for x, s in enumerate(dm.states):
        for y, a in enumerate(dm.actions):
            for i in range(game.n):
                for b in range(game.n_actions[i]):
                    a2 = a.copy()
                    a2[i] = b
                    y2 = game.action_index(a2)
                    dr = dm.R[i, x, y] - dm.R[i, x, y2]
                    dphi = stage_potential_congestion(game, s, a) - stage_potential_congestion(game, s, a2)
                    stage = max(stage, abs(dr - dphi))
    value = 0.0
    for _ in range(20):
        base = oracle.random_profile(game, rng)
        i = int(rng.integers(game.n))
        dev = base.replace(i, oracle.random_profile(game, rng)[i])
        Vb = oracle.solve(game, base, i).V
        Vd = oracle.solve(game, dev, i).V
        for x, s in enumerate(dm.states):
            dPhi = value_potential_congestion(game, base, s) - value_potential_congestion(game, dev, s)
            value = max(value, abs((Vb[x] - Vd[x]) - dPhi))
    return _result("potentials", max(stage, value), stage <= 1e-12 and value <= 1e-8,
                   stage_violation=stage, value_violation=value)


def check_gradients(seed=0, games=5):
    rng = np.random.default_rng(seed)
    fd_err, traj_err, pdt_err = 0.0, 0.0, 0.0
    h = 1e-6
    for _ in range(games):
        game = random_game(Graph.path(3), gamma=0.9, rng=rng)
        theta = _random_theta(game, rng)
        for i in range(game.n):
            g = oracle.exact_policy_gradient(game, theta, i)
            fd = np.zeros_like(g)
            for idx in np.ndindex(*g.shape):
                tp = [t.copy() for t in theta]
                tm = [t.copy() for t in theta]
                tp[i][idx] += h
                tm[i][idx] -= h
                fd[idx] = (oracle.objective(game, softmax_profile(tp), i)
                           - oracle.objective(game, softmax_profile(tm), i)) / (2 * h)
            fd_err = max(fd_err, float(np.linalg.norm(g - fd) / max(np.linalg.norm(g), 1e-12)))
            traj_err = max(traj_err, float(np.max(np.abs(oracle.trajectory_policy_gradient(game, theta, i) - g))))
            new = [t.copy() for t in theta]
            new[i] = rng.standard_normal(new[i].shape)
            lhs = oracle.objective(game, softmax_profile(new), i) - oracle.objective(game, softmax_profile(theta), i)
            pdt_err = max(pdt_err, abs(lhs - oracle.performance_difference(game, theta, new, i)))
    passed = fd_err <= 1e-5 and traj_err <= 1e-8 and pdt_err <= 1e-9
    return _result("gradients", max(fd_err, traj_err, pdt_err), passed, finite_difference_rel=fd_err,
                   trajectory_form=traj_err, performance_difference=pdt_err)


def check_regret_sandwich(seed=0, count=100):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(count):
        M, n = int(rng.integers(1, 50)), int(rng.integers(1, 8))
        worst = max(worst, sandwich_violation(RegretSeries(rng.exponential(size=(M, n)))))
    return _result("regret-sandwich", worst, worst <= 1e-12)


def check_critic_fixed_point(seed=0):
    rng = np.random.default_rng(seed)
    game = random_game(Graph.path(2), gamma=0.9, rng=rng)
    mixed = epsilon_explore(softmax_profile(_random_theta(game, rng)), 0.1)
    worst = 0.0
    for i in range(game.n):
        kc = game.graph.diameter
        sub = build_subchain(game, mixed, i, kc, rescale=False)
        Omega = make_features(game, i, kc, "tabular").matrix()
        fp = td0_fixed_point(sub, Omega)
        fp_full = td0_fixed_point(sub, Omega, full=True)
        Qbar = oracle.solve(game, mixed, i).Qbar.reshape(-1)
        worst = max(worst, float(np.max(np.abs((Omega @ fp.w)[sub.project] - Qbar))),
                    float(np.max(np.abs(fp.w - fp_full.w))), fp.eps_red)
    return _result("critic-fixed-point", worst, worst <= 1e-9)


def check_mixing(seed=0, games=20, eps_values=(0.05, 0.2)):
    """Averaged-Q perturbation under eps-mixing against ``6 n eps / (1 - gamma)^2`` (rescaled rewards)."""
    rng = np.random.default_rng(seed)
    worst_ratio, worst = 0.0, 0.0
    for _ in range(games):
        game = random_game(Graph.path(3), gamma=0.9, rng=rng)
        profile = softmax_profile(_random_theta(game, rng))
        for eps in eps_values:
            mixed = epsilon_explore(profile, eps)
            bound = 6 * game.n * eps / (1.0 - game.gamma) ** 2
            for i in range(game.n):
                diff = float(np.max(np.abs(oracle.averaged_q(game, mixed, i, rescale=True)
                                           - oracle.averaged_q(game, profile, i, rescale=True))))
                worst = max(worst, diff)
                worst_ratio = max(worst_ratio, diff / bound)
    return _result("eps-mixing", max(worst_ratio - 1.0, 0.0), worst_ratio <= 1.0,
                   max_difference=worst, worst_difference_over_bound=worst_ratio)


def chain_f_table(gamma):
    """Values of the last agent's objective at the four deterministic (xi_1, xi_4) pairs."""
    game, desc = build_chain_example(gamma)
    det = {"g": np.array([[0.0, 1.0], [0.0, 1.0]]), "b": np.array([[1.0, 0.0], [1.0, 0.0]])}
    mid = np.full((2, 2), 0.5)
    table = {}
    for k1, k4 in itertools.product("gb", "gb"):
        prof = PolicyProfile((det[k1], mid, mid, det[k4]))
        table[f"{k1}{k4}"] = oracle.objective(game, prof, 3)
    return table


def check_chain_example(gamma=0.9, seed=0):
    game, desc = build_chain_example(gamma)
    table = chain_f_table(gamma)
    target = gamma ** 4 / (1.0 - gamma)
    anchor = abs(table["gg"] - target)
    zeros = max(abs(table[k]) for k in ("gb", "bg", "bb"))
    nmpg = oracle.nmpg_check(game, desc, samples=50, rng=seed)
    # A single potential could only depend on xi_4, so switching xi_4 from b to g would
    # have to change it by the same amount under xi_1 = b and under xi_1 = g.
    pair = (table["bg"] - table["bb"], table["gg"] - table["gb"])
    contradiction = abs(pair[1] - pair[0]) > 1e-12
    passed = anchor <= 1e-10 and zeros <= 1e-10 and nmpg["passed"] and contradiction
    return _result("chain-example", max(anchor, zeros, nmpg["max_violation"]), passed,
                   f_table=table, non_mpg_pair=list(pair), nmpg=nmpg)


SUITES = {
    "decay": check_decay,
    "subchain": check_subchain,
    "potentials": check_potentials,
    "gradients": check_gradients,
    "regret-sandwich": check_regret_sandwich,
    "critic-fixed-point": check_critic_fixed_point,
    "eps-mixing": check_mixing,
    "chain-example": check_chain_example,
}


def run_suite(name):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name]()
