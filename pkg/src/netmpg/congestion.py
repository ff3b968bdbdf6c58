"""Exact evaluation for congestion games beyond the enumeration guard.

Each agent moves on its own local chain, so the joint state law is the
product of per-agent laws. Agent ``i``'s expected reward then splits into a
term that depends on ``i`` alone and one collision term per other agent
``j``, and each collision term is the value of the small Markov chain on
``(s_i, s_j)``. All of these are solved exactly (no horizon truncation).
"""

from __future__ import annotations

import math

import numpy as np

from .game import CongestionGame
from .oracle import GapReport, ascend_response
from .policy import as_tables, softmax_table


def _check(game):
    if not isinstance(game, CongestionGame):
        raise TypeError("expected a CongestionGame")


def local_chain(game, i, xi_i):
    """``P_i[s, s'] = sum_a xi_i(a|s) 1{next(s, a) = s'}``."""
    S = game.n_states[i]
    P = np.zeros((S, S))
    np.add.at(P, (np.repeat(np.arange(S), xi_i.shape[1]), game.next_of[i].ravel()), xi_i.ravel())
    return P


def _base_reward(game, i):
    e = game.edge_of[i]
    r = np.where(e >= 0, -game.eps_bar - 1.0, -game.eps_bar)
    r[game.dest_index[i]] = 0.0
    return r


class ResponseProblem:
    """Agent ``i``'s objective as a function of its own parameters, others fixed."""

    def __init__(self, game, profile, i):
        _check(game)
        tables = as_tables(profile)
        self.game, self.i = game, i
        self.S = game.n_states[i]
        self.A = game.n_actions[i]
        self.nx = game.next_of[i]
        self.r_base = _base_reward(game, i)
        self.s0 = game.start[i]
        partners = [j for j in range(game.n) if j != i and
                    np.intersect1d(game.edge_of[i][game.edge_of[i] >= 0],
                                   game.edge_of[j][game.edge_of[j] >= 0]).size]
        self.partners = partners
        Sm = max([game.n_states[j] for j in partners], default=1)
        m = len(partners)
        e_i = game.edge_of[i]
        Pj = np.tile(np.eye(Sm), (m, 1, 1))
        coll = np.zeros((m, self.S, self.A, Sm))
        starts = np.zeros(m, dtype=int)
        for k, j in enumerate(partners):
            Sj = game.n_states[j]
            Pj[k, :Sj, :Sj] = local_chain(game, j, tables[j])
            e_j = game.edge_of[j]
            # prob that j takes the same edge as (s_i, a): sum_b xi_j(b|s_j) 1{e_i = e_j(s_j, b)}
            same = (e_i[:, :, None, None] == e_j[None, None, :, :]) & (e_i[:, :, None, None] >= 0)
            coll[k, :, :, :Sj] = np.einsum("xaub,ub->xau", same, tables[j])
            starts[k] = game.start[j]
        self.Pj, self.coll, self.Sm, self.starts = Pj, coll, Sm, starts
        scale, shift = game._affine
        self.scale, self.shift = scale, shift

    def value_and_grad(self, theta_i):
        """``(J_i, dJ_i/dtheta_i)`` in the game's reward units."""
        g = self.game.gamma
        xi = softmax_table(theta_i)
        S, A, Sm = self.S, self.A, self.Sm
        P_i = local_chain(self.game, self.i, xi)
        eye = np.eye(S)
        # own term
        lu = eye - g * P_i
        V = np.linalg.solve(lu, np.sum(xi * self.r_base, axis=1))
        rho = np.linalg.solve(lu.T, eye[self.s0])
        Q = self.r_base + g * V[self.nx]
        dxi = rho[:, None] * Q
        J = V[self.s0]
        m = len(self.partners)
        if m:
            n = S * Sm
            P = np.einsum("ab,kcd->kacbd", P_i, self.Pj).reshape(m, n, n)
            r_sa = -self.coll  # (m, S, A, Sm)
            r_pi = np.einsum("xa,kxau->kxu", xi, r_sa).reshape(m, n)
            L = np.eye(n)[None] - g * P
            Vp = np.linalg.solve(L, r_pi[..., None])[..., 0].reshape(m, S, Sm)
            start = np.zeros((m, n))
            start[np.arange(m), self.s0 * Sm + self.starts] = 1.0
            rhop = np.linalg.solve(np.transpose(L, (0, 2, 1)), start[..., None])[..., 0].reshape(m, S, Sm)
            VPj = np.einsum("kyv,kuv->kyu", Vp, self.Pj)  # [k, s_i', s_j]
            Qp = r_sa + g * VPj[:, self.nx, :]  # (m, S, A, Sm)
            dxi = dxi + np.einsum("kxu,kxau->xa", rhop, Qp)
            J = J + Vp[np.arange(m), self.s0, self.starts].sum()
        grad = xi * (dxi - np.sum(xi * dxi, axis=1, keepdims=True))
        return self.scale * J + self.shift / (1.0 - g), self.scale * grad

    def __call__(self, theta_i):
        return self.value_and_grad(theta_i)

    def upper_bound(self, tol=1e-10):
        """Optimal value over own-state policies with full knowledge of the others' laws.

        Non-stationary backward induction over the collision-adjusted stage
        reward; dominates every stationary local policy.
        """
        g = self.game.gamma
        span = self.game.eps_bar + self.game.n
        T = max(1, math.ceil(math.log(tol * (1.0 - g) / span) / math.log(g)))
        # others' edge-traversal probabilities over time
        m = len(self.partners)
        laws = np.zeros((m, self.Sm))
        laws[np.arange(m), self.starts] = 1.0
        stage = []
        for _ in range(T):
            c = np.einsum("ku,kxau->xa", laws, self.coll) if m else np.zeros((self.S, self.A))
            stage.append(self.r_base - c)
            laws = np.einsum("ku,kuv->kv", laws, self.Pj)
        V = np.zeros(self.S)  # tail beyond T bounded by tol
        for t in range(T - 1, -1, -1):
            V = np.max(stage[t] + g * V[self.nx], axis=1)
        return self.scale * V[self.s0] + self.shift / (1.0 - g)


def objectives_congestion(game, profile):
    """Exact ``J_i`` for every agent via the pairwise chains."""
    tables = as_tables(profile)
    out = np.empty(game.n)
    for i in range(game.n):
        theta_i = np.log(np.maximum(tables[i], 1e-300))
        out[i] = ResponseProblem(game, tables, i).value_and_grad(theta_i)[0]
    return out


def best_response_congestion(game, profile, i, restarts=3, steps=200, rng=None):
    prob = ResponseProblem(game, profile, i)
    init = np.log(np.maximum(as_tables(profile)[i], 1e-13))
    return ascend_response(prob, (prob.S, prob.A), restarts, rng, init=init, max_iter=steps)


def ne_gap_congestion(game, profile, restarts=3, steps=200, rng=None, method="local"):
    """Per-agent NE-gaps at any scale of congestion game."""
    rng = np.random.default_rng(rng)
    J = objectives_congestion(game, profile)
    best = np.empty(game.n)
    for i in range(game.n):
        if method == "local":
            best[i] = best_response_congestion(game, profile, i, restarts, steps, rng)
        elif method == "upper":
            best[i] = ResponseProblem(game, profile, i).upper_bound()
        else:
            raise ValueError(f"unknown best-response method {method!r}")
    raw = best - J
    return GapReport(np.maximum(raw, 0.0), raw, J, best)


# ---------------------------------------------------------------------------
# marginal propagation
# ---------------------------------------------------------------------------


def _horizon(gamma, bound, tol):
    return max(1, math.ceil(math.log(tol * (1.0 - gamma) / max(bound, 1e-300)) / math.log(gamma)))


def _edge_probs(game, i, p, xi):
    """Probability that agent ``i`` traverses each traffic edge, given state law ``p``."""
    sa = p[:, None] * xi
    e = game.edge_of[i]
    q = np.zeros(len(game.net.edges))
    mask = e >= 0
    np.add.at(q, e[mask], sa[mask])
    return q


def objectives_congestion_series(game, profile, tol=1e-10, start=None):
    """``J_i`` by forward propagation of per-agent marginals (truncated, certified tail)."""
    tables = as_tables(profile)
    g = game.gamma
    scale, shift = game._affine
    T = _horizon(g, game.eps_bar + game.n, tol / max(scale, 1e-300))
    start = game.start if start is None else tuple(start)
    laws = [np.eye(game.n_states[i])[start[i]] for i in range(game.n)]
    chains = [local_chain(game, i, tables[i]) for i in range(game.n)]
    base = [_base_reward(game, i) for i in range(game.n)]
    J = np.zeros(game.n)
    for t in range(T):
        q = np.array([_edge_probs(game, i, laws[i], tables[i]) for i in range(game.n)])
        total = q.sum(axis=0)
        for i in range(game.n):
            e = game.edge_of[i]
            others = np.where(e >= 0, (total - q[i])[np.maximum(e, 0)], 0.0)
            J[i] += g ** t * np.sum(laws[i][:, None] * tables[i] * (base[i] - others))
        laws = [laws[i] @ chains[i] for i in range(game.n)]
    return scale * J + shift / (1.0 - g)


def value_potential_congestion(game, profile, s, tol=1e-9):
    """Discounted expected stage potential from global state ``s``.

    Per-edge counts are sums of independent indicators, so
    ``E[N (N + 1) / 2] = ((sum p)^2 - sum p^2 + 2 sum p) / 2``. The series is
    truncated once ``gamma^T phi_max / (1 - gamma) <= tol``.
    """
    _check(game)
    tables = as_tables(profile)
    g = game.gamma
    scale, _ = game._affine
    n = game.n
    phi_max = scale * (n * (n + 1) / 2.0 + game.eps_bar * n)
    T = _horizon(g, phi_max, tol)
    s = game.validate_state(s)
    laws = [np.eye(game.n_states[i])[s[i]] for i in range(n)]
    chains = [local_chain(game, i, tables[i]) for i in range(n)]
    total = 0.0
    for t in range(T):
        q = np.array([_edge_probs(game, i, laws[i], tables[i]) for i in range(n)])
        m1 = q.sum(axis=0)
        m2 = (q ** 2).sum(axis=0)
        pairs = 0.5 * (m1 ** 2 - m2 + 2.0 * m1)
        active = sum(1.0 - laws[i][game.dest_index[i]] for i in range(n))
        total += g ** t * (-pairs.sum() - game.eps_bar * active)
        laws = [laws[i] @ chains[i] for i in range(n)]
    return scale * total
