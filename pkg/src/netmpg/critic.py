"""Localized TD(lambda) with linear features and its generalized form."""

from __future__ import annotations

from dataclasses import dataclass
import math
import warnings

import numpy as np

from .policy import PolicyProfile, as_tables, epsilon_explore, sample_action, softmax_profile


class CriticDivergence(FloatingPointError):
    def __init__(self, agent, step):
        super().__init__(f"critic weights of agent {agent} became non-finite at step {step}")
        self.agent, self.step = agent, step


class FeatureMap:
    """Linear features of agent ``i`` over ``(s_N, a_i)``, ``N`` the ``kappa_c``-hop neighborhood.

    Every feature vector is represented sparsely as ``(indices, value)``: the
    listed coordinates all equal ``value`` and the rest are zero.

    Parameters
    ----------
    hood : tuple of int
        Agents in the neighborhood, sorted.
    state_sizes : tuple of int
        ``|S_j|`` for ``j`` in ``hood``.
    n_actions : int
    mode : {"tabular", "onehot-concat"}
    """

    def __init__(self, i, hood, state_sizes, n_actions, mode="tabular"):
        self.i = i
        self.hood = tuple(hood)
        self.state_sizes = tuple(state_sizes)
        self.n_actions = int(n_actions)
        self.mode = mode
        if mode == "tabular":
            self.dim = math.prod(self.state_sizes) * self.n_actions
            self.value = 1.0
        elif mode == "onehot-concat":
            self.offsets = np.concatenate([[0], np.cumsum(self.state_sizes)]).astype(int)
            self.dim = int(self.offsets[-1]) + self.n_actions
            self.value = 1.0 / math.sqrt(len(self.hood) + 1)
        else:
            raise ValueError(f"unknown feature mode {mode!r}")

    def active(self, s_hood, a_i):
        """Indices of the non-zero coordinates for restricted state ``s_hood`` and action ``a_i``."""
        if self.mode == "tabular":
            idx = int(np.ravel_multi_index(tuple(s_hood), self.state_sizes)) if self.hood else 0
            return np.array([idx * self.n_actions + a_i])
        return np.append(self.offsets[:-1] + np.asarray(s_hood, dtype=int), self.offsets[-1] + a_i)

    def vector(self, s_hood, a_i):
        out = np.zeros(self.dim)
        out[self.active(s_hood, a_i)] = self.value
        return out

    def matrix(self):
        """Feature matrix over all ``(s_N, a_i)`` in C order over ``state_sizes + (n_actions,)``."""
        rows = [self.vector(idx[:-1], idx[-1]) for idx in np.ndindex(*self.state_sizes, self.n_actions)]
        return np.array(rows)


def make_features(game, i, kappa_c, mode="tabular"):
    if kappa_c < game.kappa_r:
        raise ValueError(f"kappa_c={kappa_c} must be at least kappa_r={game.kappa_r}")
    hood = game.graph.khop(i, kappa_c)
    return FeatureMap(i, hood, [game.n_states[j] for j in hood], game.n_actions[i], mode)


def q_hat(features, w, s_hood, a_i):
    """``<phi(s_hood, a_i), w>``."""
    w = np.asarray(w)
    if w.shape != (features.dim,):
        raise ValueError(f"weight dimension {w.shape} does not match feature dimension {features.dim}")
    return features.value * float(w[features.active(s_hood, a_i)].sum())


@dataclass(frozen=True)
class CriticConfig:
    K: int = 10
    alpha: float = 1e-3
    lam: float = 0.0
    eps: float = 0.0
    kappa_c: int = 1

    def __post_init__(self):
        if self.K < 0:
            raise ValueError("K must be non-negative")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not 0.0 <= self.lam < 1.0:
            raise ValueError("lambda must lie in [0, 1)")
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError("eps must lie in [0, 1]")


@dataclass
class Trajectory:
    """``K + 1`` steps of global states, actions and per-agent rewards."""

    states: np.ndarray  # (K+1, n)
    actions: np.ndarray  # (K+1, n)
    rewards: np.ndarray  # (K+1, n)

    def __len__(self):
        return len(self.states)


@dataclass
class RestrictedTrajectory:
    """What agent ``i`` observes: ``(s_N(t), a_i(t), r_i(t))``."""

    i: int
    hood: tuple
    states: np.ndarray  # (K+1, |N|)
    actions: np.ndarray  # (K+1,)
    rewards: np.ndarray  # (K+1,)


def rollout(game, profile, length, rng, s0=None):
    """Sample ``length`` consecutive (state, action, reward) steps."""
    states = np.empty((length, game.n), dtype=int)
    actions = np.empty((length, game.n), dtype=int)
    rewards = np.empty((length, game.n))
    s = game.sample_initial(rng) if s0 is None else tuple(s0)
    tables = as_tables(profile)
    for t in range(length):
        a = sample_action(tables, s, rng)
        states[t], actions[t] = s, a
        rewards[t] = game.rewards(s, a)
        if t + 1 < length:
            s = game.step(s, a, rng)
    return Trajectory(states, actions, rewards)


def collect_trajectory(game, profile, eps, K, rng):
    """``K + 1`` samples under the eps-mixed profile, starting from ``mu``."""
    if eps == 0.0:
        warnings.warn("eps = 0: stationary coverage of the critic is not guaranteed", stacklevel=2)
    return rollout(game, epsilon_explore(profile, eps), K + 1, rng)


def restrict(traj, i, hood):
    """Project a trajectory onto agent ``i``'s neighborhood, own action and own reward."""
    hood = tuple(hood)
    return RestrictedTrajectory(i, hood, traj.states[:, list(hood)].copy(),
                                traj.actions[:, i].copy(), traj.rewards[:, i].copy())


def _td_single(rt, features, gamma, alpha, lam_trace, w0=None):
    """Localized TD(lambda) inner loop for one agent on its restricted trajectory."""
    K = len(rt.actions) - 1
    w = np.zeros(features.dim) if w0 is None else np.array(w0, dtype=float)
    v = features.value
    idx = [features.active(rt.states[t], rt.actions[t]) for t in range(K + 1)]
    zeta = np.zeros(features.dim)
    zeta[idx[0]] = v
    for t in range(K):
        delta = (v * w[idx[t]].sum() - rt.rewards[t]) - gamma * (v * w[idx[t + 1]].sum())
        coef = alpha * delta
        w -= coef * zeta
        zeta *= lam_trace
        zeta[idx[t + 1]] += v
        if not math.isfinite(coef):
            raise CriticDivergence(rt.i, t)
    if not np.all(np.isfinite(w)):
        raise CriticDivergence(rt.i, K)
    return w


def td_lambda_local(game, theta_or_profile, features, config, rng, traj=None, w0=None):
    """Run localized TD(lambda) for every agent over one shared trajectory.

    Parameters
    ----------
    features : list of FeatureMap
    config : CriticConfig
    traj : Trajectory, optional
        Reuse a trajectory instead of sampling one (the profile is then unused).
    w0 : list of arrays, optional
        Initial weights; zeros when omitted.

    Returns
    -------
    list of ndarray
        ``w_i(K)`` per agent.
    """
    if traj is None:
        profile = theta_or_profile if isinstance(theta_or_profile, PolicyProfile) else softmax_profile(theta_or_profile)
        traj = collect_trajectory(game, profile, config.eps, config.K, rng)
    lam_trace = game.gamma * config.lam
    out = []
    for i in range(game.n):
        rt = restrict(traj, i, features[i].hood)
        out.append(_td_single(rt, features[i], game.gamma, config.alpha, lam_trace,
                              None if w0 is None else w0[i]))
    return out


def td_functional(features, gamma):
    """``F = -delta`` on a two-step window, which recovers localized TD(lambda)."""
    v = features.value

    def F(window, w):
        (s0, a0, r0), (s1, a1, _) = window
        delta = (v * w[features.active(s0, a0)].sum() - r0) - gamma * (v * w[features.active(s1, a1)].sum())
        return -delta

    return F


def generalized_td(rt, features, F, lam_trace, t0, alpha, K=None, w0=None, trace_log=None):
    """Generic stochastic-approximation loop ``w += alpha F(X(t), w) zeta``.

    ``X(t)`` is the window of restricted samples ``t - t0 .. t + 1`` given as
    ``(s_N, a_i, r_i)`` triples; the trace follows ``zeta <- lam_trace zeta + psi``
    starting from ``psi`` of the first sample used.
    """
    total = len(rt.actions)
    K = total - 1 - t0 if K is None else K
    if K < 0 or t0 + K + 1 > total:
        raise ValueError("trajectory too short for the requested window and K")
    w = np.zeros(features.dim) if w0 is None else np.array(w0, dtype=float)
    v = features.value
    zeta = np.zeros(features.dim)
    zeta[features.active(rt.states[t0], rt.actions[t0])] = v
    for k in range(K):
        t = t0 + k
        window = [(rt.states[u], rt.actions[u], rt.rewards[u]) for u in range(t - t0, t + 2)]
        coef = alpha * F(window, w)
        w += coef * zeta
        zeta *= lam_trace
        zeta[features.active(rt.states[t + 1], rt.actions[t + 1])] += v
        if trace_log is not None:
            trace_log.append(float(np.linalg.norm(zeta)))
        if not math.isfinite(coef):
            raise CriticDivergence(rt.i, t)
    return w
