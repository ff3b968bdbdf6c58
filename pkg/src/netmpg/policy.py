"""Softmax localized policies, log-gradients and epsilon-exploration."""

from __future__ import annotations

from dataclasses import dataclass
import json

import numpy as np

PROB_FLOOR = 1e-300


@dataclass(frozen=True)
class PolicyProfile:
    """Per-agent local policy tables ``xi_i[s_i, a_i]``.

    ``tag`` records provenance: ``"softmax"``, ``"explicit"`` or ``"eps-mixed"``.
    """

    tables: tuple
    tag: str = "explicit"

    def __post_init__(self):
        tables = tuple(np.asarray(t, dtype=float) for t in self.tables)
        for i, t in enumerate(tables):
            if t.ndim != 2 or np.any(t < 0) or np.max(np.abs(t.sum(axis=1) - 1.0)) > 1e-12:
                raise ValueError(f"policy table of agent {i} is not row-stochastic")
        object.__setattr__(self, "tables", tables)

    def __len__(self):
        return len(self.tables)

    def __getitem__(self, i):
        return self.tables[i]

    def replace(self, i, table, tag="explicit"):
        tables = list(self.tables)
        tables[i] = table
        return PolicyProfile(tuple(tables), tag)


def as_tables(profile):
    """Accept a :class:`PolicyProfile` or a plain sequence of tables."""
    if isinstance(profile, PolicyProfile):
        return profile.tables
    return tuple(np.asarray(t, dtype=float) for t in profile)


def softmax_table(theta_i):
    """Row-wise softmax of ``theta_i`` with max subtraction."""
    theta_i = np.asarray(theta_i, dtype=float)
    z = np.exp(theta_i - theta_i.max(axis=-1, keepdims=True))
    return z / z.sum(axis=-1, keepdims=True)


def softmax_probs(theta_i, s_i):
    """Action distribution of agent ``i`` at local state ``s_i``."""
    return softmax_table(np.asarray(theta_i)[s_i])


def softmax_profile(theta):
    return PolicyProfile(tuple(softmax_table(t) for t in theta), "softmax")


def zero_params(game):
    """All-zero softmax parameters, i.e. the uniform policy."""
    return [np.zeros((game.n_states[i], game.n_actions[i])) for i in range(game.n)]


def uniform_profile(game):
    return PolicyProfile(tuple(np.full((game.n_states[i], game.n_actions[i]), 1.0 / game.n_actions[i])
                               for i in range(game.n)))


def log_prob_grad(theta_i, s_i, a_i):
    """Gradient of ``log xi_i(a_i | s_i)`` with respect to the full table ``theta_i``.

    Only row ``s_i`` is non-zero and equals ``e_{a_i} - xi_i(. | s_i)``.
    """
    theta_i = np.asarray(theta_i, dtype=float)
    g = np.zeros_like(theta_i)
    g[s_i] = -softmax_probs(theta_i, s_i)
    g[s_i, a_i] += 1.0
    return g


def prob_grad(theta_i, s_i, a_i):
    """Gradient of ``xi_i(a_i | s_i)`` itself (log-gradient times the probability)."""
    p = max(float(softmax_probs(theta_i, s_i)[a_i]), PROB_FLOOR)
    return p * log_prob_grad(theta_i, s_i, a_i)


def log_prob(theta_i, s_i, a_i):
    return float(np.log(max(float(softmax_probs(theta_i, s_i)[a_i]), PROB_FLOOR)))


def epsilon_explore(profile, eps):
    """Mix every local policy with the uniform one: ``(1 - eps) xi + eps / |A_i|``."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    tables = tuple((1.0 - eps) * t + eps / t.shape[1] for t in as_tables(profile))
    return PolicyProfile(tables, "eps-mixed")


def sample_action(profile, s, rng):
    """Independent per-agent draws; one uniform variate per agent."""
    tables = as_tables(profile)
    u = rng.random(len(tables))
    out = []
    for i, t in enumerate(tables):
        cdf = np.cumsum(t[s[i]])
        out.append(min(int(np.searchsorted(cdf, u[i], side="right")), t.shape[1] - 1))
    return tuple(out)


def joint_action_prob(profile, s, a):
    return float(np.prod([t[s[i], a[i]] for i, t in enumerate(as_tables(profile))]))


def params_to_json(theta):
    """Checkpoint layout: ``{"<agent>": [[theta[s_i][a_i] ...] ...]}`` (rows = local states)."""
    return json.dumps({str(i): np.asarray(t).tolist() for i, t in enumerate(theta)})


def params_from_json(text):
    data = json.loads(text)
    return [np.asarray(data[str(i)], dtype=float) for i in range(len(data))]
