"""Stationary distributions, the state-action chain of one agent, and its restriction.

For agent ``i`` the chain runs on ``z = (s, a_i)``, flattened as
``s_flat * |A_i| + a_i``. Restricted coordinates ``z_N = (s_N, a_i)`` with
``N`` the ``kappa_c``-hop neighborhood are flattened in C order over
``n_states[N] + (|A_i|,)``, the same order used by the feature maps.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .oracle import action_marginalizer, others_policy
from .policy import as_tables


class ChainError(ValueError):
    pass


def is_irreducible(P, tol=0.0):
    n_comp, _ = connected_components(csr_matrix(P > tol), directed=True, connection="strong")
    return n_comp == 1


def period(P, tol=0.0):
    """Period of an irreducible chain: gcd of ``level[u] + 1 - level[v]`` over edges."""
    graph = csr_matrix(P > tol)
    order, pred = breadth_first_order(graph, 0, directed=True, return_predecessors=True)
    level = np.full(P.shape[0], -1)
    level[0] = 0
    for u in order[1:]:
        level[u] = level[pred[u]] + 1
    rows, cols = graph.nonzero()
    diffs = np.abs(level[rows] + 1 - level[cols])
    return int(reduce(math.gcd, diffs.tolist(), 0))


def stationary_distribution(P, check=True):
    """Solve ``pi^T P = pi^T``, ``sum(pi) = 1`` directly.

    Raises :class:`ChainError` for reducible or periodic chains when ``check`` is set.
    """
    P = np.asarray(P, dtype=float)
    if check:
        if not is_irreducible(P):
            raise ChainError("chain is reducible")
        if period(P) != 1:
            raise ChainError(f"chain is periodic with period {period(P)}")
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    if np.max(np.abs(pi @ P - pi)) > 1e-10:
        raise ChainError("stationary solve residual above 1e-10")
    return pi


def stationary_power(P, tol=1e-13, max_iter=10_000_000):
    """Power iteration from the uniform vector; an independent route for cross-checks."""
    P = np.asarray(P, dtype=float)
    pi = np.full(P.shape[0], 1.0 / P.shape[0])
    for _ in range(max_iter):
        nxt = pi @ P
        if np.max(np.abs(nxt - pi)) < tol:
            return nxt / nxt.sum()
        pi = nxt
    raise ChainError("power iteration did not converge")


# ---------------------------------------------------------------------------
# state-action chain of one agent
# ---------------------------------------------------------------------------


def z_chain(game, profile, i, rescale=True):
    """Kernel, reward and cost of agent ``i``'s state-action chain.

    ``Pz[(s, a_i), (s', a_i')] = sum_{a_-i} xi_-i P(s'|s, a) xi_i(a_i'|s_i')``;
    reward ``rbar_i(s, a_i)``; cost ``C = (I - gamma Pz)^{-1} rbar`` equals ``Qbar_i``.
    """
    dm = game.dense
    W = others_policy(game, profile, i)
    E = action_marginalizer(game, i)
    S, Ai = len(dm.states), game.n_actions[i]
    pre = np.einsum("sa,sat,ak->skt", W, dm.P, E)  # (S, A_i, S)
    xi_i = as_tables(profile)[i][dm.states[:, i]]  # (S', A_i')
    Pz = (pre[:, :, :, None] * xi_i[None, None, :, :]).reshape(S * Ai, S * Ai)
    lo, hi = game.reward_range
    scale, shift = (1.0 / (hi - lo), -lo / (hi - lo)) if rescale and hi > lo else (1.0, 0.0)
    rbar = ((W * (scale * dm.R[i] + shift)) @ E).reshape(-1)
    C = np.linalg.solve(np.eye(S * Ai) - game.gamma * Pz, rbar)
    return Pz, rbar, C


@dataclass
class SubChain:
    i: int
    kappa_c: int
    hood: tuple
    shape: tuple  # n_states[hood] + (|A_i|,)
    project: np.ndarray  # z -> z_N
    Pz: np.ndarray
    pi_full: np.ndarray
    r_full: np.ndarray
    C_full: np.ndarray
    P_bar: np.ndarray
    pi_bar: np.ndarray
    r_tilde: np.ndarray
    C_tilde: np.ndarray
    gamma: float
    kappa_r: int


def _projection(game, i, hood):
    dm = game.dense
    Ai = game.n_actions[i]
    shape = tuple(game.n_states[j] for j in hood) + (Ai,)
    s_part = np.ravel_multi_index(tuple(dm.states[:, j] for j in hood), shape[:-1]) if hood else np.zeros(len(dm.states), int)
    return shape, (s_part[:, None] * Ai + np.arange(Ai)[None, :]).reshape(-1)


def build_subchain(game, profile, i, kappa_c, rescale=True):
    """Restrict agent ``i``'s state-action chain to its ``kappa_c``-hop coordinates.

    ``P_bar = diag(1/pi_N) M^T diag(pi) Pz M`` with ``M`` the one-hot
    projection ``z -> z_N``; rewards are averaged the same way.
    """
    hood = game.graph.khop(i, kappa_c)
    Pz, rbar, C = z_chain(game, profile, i, rescale)
    pi = stationary_distribution(Pz)
    shape, proj = _projection(game, i, hood)
    nN = math.prod(shape)
    M = np.zeros((len(proj), nN))
    M[np.arange(len(proj)), proj] = 1.0
    pi_N = M.T @ pi
    if np.any(pi_N <= 0):
        raise ChainError("restricted stationary marginal has empty states")
    weighted = M.T @ (pi[:, None] * Pz)
    P_bar = (weighted @ M) / pi_N[:, None]
    r_tilde = (M.T @ (pi * rbar)) / pi_N
    C_tilde = np.linalg.solve(np.eye(nN) - game.gamma * P_bar, r_tilde)
    return SubChain(i, kappa_c, hood, shape, proj, Pz, pi, rbar, C, P_bar, pi_N, r_tilde, C_tilde,
                    game.gamma, game.kappa_r)


def _expected_local_conditionals(game, profile, sub, j):
    """Original next-coordinate law of agent ``j`` as a function of ``z_N``.

    Returns an array ``(n_N, |Z_j|)``; for ``j != i`` the action is integrated
    out under ``xi_j``, for ``j = i`` the next action is drawn from ``xi_i``.
    """
    tables = as_tables(profile)
    hood = sub.hood
    pos = {k: p for p, k in enumerate(hood)}
    coords = np.array(list(np.ndindex(*sub.shape)))  # (n_N, |hood|+1)
    k = game.kernels[j]
    s_scope = tuple(coords[:, pos[m]] for m in k.scope)
    if j == sub.i:
        a_i = coords[:, -1]
        rows = k.table[s_scope + (a_i,)]  # (n_N, S_i')
        return (rows[:, :, None] * tables[j][None, :, :]).reshape(len(coords), -1)
    rows = k.table[s_scope]  # (n_N, A_j, S_j')
    xi_j = tables[j][coords[:, pos[j]]]  # (n_N, A_j)
    return np.einsum("na,nat->nt", xi_j, rows)


def _bar_local_conditionals(sub, j):
    n_N = sub.P_bar.shape[0]
    P = sub.P_bar.reshape((n_N,) + sub.shape)
    p = sub.hood.index(j) + 1
    if j == sub.i:
        keep = (p, P.ndim - 1)
        axes = tuple(ax for ax in range(1, P.ndim) if ax not in keep)
        return P.sum(axis=axes).reshape(n_N, -1)
    axes = tuple(ax for ax in range(1, P.ndim) if ax != p)
    return P.sum(axis=axes)


@dataclass
class CheckReport:
    passed: bool
    checks: dict

    def to_dict(self):
        return {"passed": self.passed, "checks": self.checks}


def subchain_checks(game, profile, sub, tol_marginal=1e-8, tol_local=1e-12):
    """Verify ergodicity, marginal stationarity, local conditionals and the cost gap."""
    checks = {}
    checks["irreducible"] = {"passed": bool(is_irreducible(sub.P_bar))}
    per = period(sub.P_bar) if checks["irreducible"]["passed"] else 0
    checks["aperiodic"] = {"passed": per == 1, "period": per}
    try:
        pi_sub = stationary_distribution(sub.P_bar, check=False)
        err = float(np.max(np.abs(pi_sub - sub.pi_bar)))
    except (ChainError, np.linalg.LinAlgError):
        err = math.inf
    checks["stationary_marginal"] = {"passed": err <= tol_marginal, "max_error": err}
    worst, where = 0.0, None
    for j in game.graph.khop(sub.i, sub.kappa_c - 1) if sub.kappa_c >= 1 else ():
        diff = np.abs(_bar_local_conditionals(sub, j) - _expected_local_conditionals(game, profile, sub, j))
        if diff.max() > worst:
            worst = float(diff.max())
            where = {"agent": int(j), "z_N": int(np.unravel_index(diff.argmax(), diff.shape)[0])}
    checks["local_conditionals"] = {"passed": worst <= tol_local, "max_error": worst, "worst": where}
    gap = cost_gap(sub)
    bound = sub.gamma ** (sub.kappa_c - sub.kappa_r + 1) / (1.0 - sub.gamma)
    worst_z = int(np.argmax(np.abs(sub.C_tilde[sub.project] - sub.C_full)))
    checks["cost_gap"] = {"passed": gap <= bound + 1e-12, "gap": gap, "bound": bound, "worst_z": worst_z}
    return CheckReport(all(c["passed"] for c in checks.values()), checks)


def cost_gap(sub):
    return float(np.max(np.abs(sub.C_tilde[sub.project] - sub.C_full)))


# ---------------------------------------------------------------------------
# projected Bellman fixed point
# ---------------------------------------------------------------------------


@dataclass
class FixedPoint:
    w: np.ndarray
    eps_red: float
    residual: float


def td0_fixed_point(sub, Omega, full=False):
    """Solve ``Omega^T D (I - gamma P) Omega w = Omega^T D R``.

    On the restricted chain by default; ``full=True`` lifts the features to the
    unrestricted state-action chain (the same ``w*`` in exact arithmetic).
    """
    Omega = np.asarray(Omega, dtype=float)
    if np.linalg.matrix_rank(Omega) < Omega.shape[1]:
        raise ValueError("feature matrix has linearly dependent columns")
    if full:
        X = Omega[sub.project]
        D, P, R = sub.pi_full, sub.Pz, sub.r_full
    else:
        X = Omega
        D, P, R = sub.pi_bar, sub.P_bar, sub.r_tilde
    XtD = X.T * D[None, :]
    A = XtD @ (X - sub.gamma * P @ X)
    b = XtD @ R
    w = np.linalg.solve(A, b)
    residual = float(np.max(np.abs(A @ w - b)))
    eps_red = float(np.max(np.abs(Omega @ w - sub.C_tilde)))
    return FixedPoint(w, eps_red, residual)
