"""Independent policy gradient (exact) and the localized actor-critic."""

from __future__ import annotations

from dataclasses import dataclass, field
import time

import numpy as np

from .critic import CriticConfig, rollout, td_lambda_local
from .oracle import policy_gradients
from .policy import softmax_profile, softmax_table


def default_beta(game, kappa_G, mode="exact"):
    """Theory step size ``(1 - gamma)^3 / (c n(kappa_G))`` with ``c = 6`` (exact) or ``24`` (approx).

    Assumes rewards in [0, 1].
    """
    c = {"exact": 6.0, "approx": 24.0}[mode]
    return (1.0 - game.gamma) ** 3 / (c * game.graph.n_of_kappa(kappa_G))


@dataclass
class LearningLog:
    """Replayable record of a learning run."""

    seeds: dict = field(default_factory=dict)
    snapshot_every: int = 1
    snapshots: dict = field(default_factory=dict)  # m -> list of theta_i
    grad_norms: list = field(default_factory=list)  # per iteration, per agent
    critic_weights: dict = field(default_factory=dict)  # m -> list of w_i
    wall_clock: float = 0.0
    diverged_at: int | None = None

    def record(self, m, theta, force=False):
        if force or m % self.snapshot_every == 0:
            self.snapshots[m] = [t.copy() for t in theta]


def _copy(theta):
    return [np.array(t, dtype=float) for t in theta]


def ipg_exact(game, theta0, beta, M, callback=None, snapshot_every=1, rescale=False):
    """Simultaneous exact-gradient ascent ``theta_i <- theta_i + beta grad_i J_i``.

    ``callback(m, theta)`` is invoked on ``theta(m)`` for ``m = 0..M`` with a copy.
    """
    theta = _copy(theta0)
    log = LearningLog(snapshot_every=snapshot_every)
    start = time.perf_counter()
    for m in range(M):
        log.record(m, theta)
        if callback is not None:
            callback(m, _copy(theta))
        grads, _ = policy_gradients(game, theta, rescale)
        log.grad_norms.append([float(np.linalg.norm(g)) for g in grads])
        theta = [t + beta * g for t, g in zip(theta, grads)]
    log.record(M, theta, force=True)
    if callback is not None:
        callback(M, _copy(theta))
    log.wall_clock = time.perf_counter() - start
    return theta, log


def grad_estimate(game, theta, weights, features, T, H, rng, q_fn=None):
    """Running average of ``eta_i = sum_k gamma^k grad log xi_i(a_i(k)|s_i(k)) Qhat_i(k)``.

    ``T`` trajectories of length ``H`` are sampled under the un-mixed softmax
    policy and shared by all agents. ``q_fn(i, s, a)`` replaces the linear
    critic when given (oracle substitution for testing).

    Returns
    -------
    deltas : list of ndarray
    etas : list of list of ndarray
        ``etas[t][i]`` for every sampled trajectory.
    """
    profile = softmax_profile(theta)
    tables = profile.tables
    gamma = game.gamma
    deltas = [np.zeros_like(t) for t in tables]
    etas = []
    disc = gamma ** np.arange(H)
    for t in range(T):
        traj = rollout(game, profile, H, rng)
        eta_t = []
        for i in range(game.n):
            s_i = traj.states[:, i]
            a_i = traj.actions[:, i]
            if q_fn is None:
                f = features[i]
                hood = list(f.hood)
                q = np.array([f.value * weights[i][f.active(traj.states[k, hood], a_i[k])].sum()
                              for k in range(H)])
            else:
                q = np.array([q_fn(i, traj.states[k], a_i[k]) for k in range(H)])
            coef = disc * q
            eta = np.zeros_like(tables[i])
            # grad log xi = e_{a} - xi(.|s) on row s
            np.add.at(eta, (s_i, a_i), coef)
            np.add.at(eta, s_i, -coef[:, None] * tables[i][s_i])
            eta_t.append(eta)
            deltas[i] = (t / (t + 1)) * deltas[i] + eta / (t + 1)
        etas.append(eta_t)
    return deltas, etas


@dataclass(frozen=True)
class ActorConfig:
    M: int = 4000
    T: int = 1
    H: int = 15
    beta: float = 1e-3
    kappa_G: int = 1
    critic: CriticConfig = CriticConfig()
    snapshot_every: int = 100
    critic_warm_start: bool = False

    def __post_init__(self):
        if self.M < 0 or self.T < 1 or self.H < 1 or self.beta <= 0:
            raise ValueError("M >= 0, T >= 1, H >= 1 and beta > 0 are required")


def localized_actor_critic(game, config, features, critic_rng, actor_rng, theta0=None, callback=None,
                           keep_weights_every=0):
    """Alternate localized TD(lambda) and sampled policy-gradient steps for ``M`` rounds.

    Parameters
    ----------
    features : list of FeatureMap
    critic_rng, actor_rng : numpy Generator
        Separate streams for the critic's and the actor's trajectories.
    theta0 : list of ndarray, optional
        Zeros when omitted.
    callback : callable, optional
        ``callback(m, theta)`` on a copy of ``theta(m)`` for ``m = 0..M``.
    keep_weights_every : int
        Store critic weights in the log every this many rounds (0 disables).
    """
    if config.critic.kappa_c < game.kappa_r:
        raise ValueError("kappa_c must be at least kappa_r")
    theta = _copy(theta0) if theta0 is not None else [
        np.zeros((game.n_states[i], game.n_actions[i])) for i in range(game.n)]
    log = LearningLog(snapshot_every=config.snapshot_every)
    start = time.perf_counter()
    weights = None
    for m in range(config.M):
        log.record(m, theta)
        if callback is not None:
            callback(m, _copy(theta))
        weights = td_lambda_local(game, theta, features, config.critic, critic_rng,
                                  w0=weights if config.critic_warm_start else None)
        if keep_weights_every and m % keep_weights_every == 0:
            log.critic_weights[m] = [w.copy() for w in weights]
        deltas, _ = grad_estimate(game, theta, weights, features, config.T, config.H, actor_rng)
        log.grad_norms.append([float(np.linalg.norm(d)) for d in deltas])
        theta = [t + config.beta * d for t, d in zip(theta, deltas)]
        if not all(np.all(np.isfinite(t)) for t in theta):
            log.diverged_at = m
            raise FloatingPointError(f"policy parameters became non-finite at round {m}")
    log.record(config.M, theta, force=True)
    if callback is not None:
        callback(config.M, _copy(theta))
    log.wall_clock = time.perf_counter() - start
    return theta, log


def policy_tables(theta):
    return [softmax_table(t) for t in theta]
