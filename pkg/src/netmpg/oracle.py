"""Exact solvers for enumerable games.

Every routine works on the dense enumeration ``game.dense`` (see
:class:`netmpg.game.DenseModel`) and is therefore limited by the enumeration
guard. Global states are flat indices in C order over ``game.n_states``.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import minimize

from .policy import PolicyProfile, as_tables, epsilon_explore, softmax_profile, softmax_table

TOL_VI = 1e-10
TIE_TOL = 1e-9
THETA_BOX = 30.0


@dataclass
class ExactSolution:
    """Value quantities of one agent under a fixed profile.

    Arrays use flat global state ``s`` and flat joint action ``a``;
    ``Qbar``/``Abar`` are indexed ``[s, a_i]``.
    """

    Q: np.ndarray
    Qbar: np.ndarray
    V: np.ndarray
    A: np.ndarray
    Abar: np.ndarray
    J: float
    d: np.ndarray


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------


def joint_policy(game, profile):
    """``Xi[s, a] = prod_i xi_i(a_i | s_i)``."""
    dm = game.dense
    out = np.ones((len(dm.states), len(dm.actions)))
    for i, t in enumerate(as_tables(profile)):
        out *= t[dm.states[:, i]][:, dm.actions[:, i]]
    return out


def others_policy(game, profile, i):
    """``prod_{j != i} xi_j(a_j | s_j)`` over (s, a)."""
    dm = game.dense
    out = np.ones((len(dm.states), len(dm.actions)))
    for j, t in enumerate(as_tables(profile)):
        if j != i:
            out *= t[dm.states[:, j]][:, dm.actions[:, j]]
    return out


def action_marginalizer(game, i):
    """One-hot map from joint action to agent ``i``'s local action, shape (A, A_i)."""
    dm = game.dense
    E = np.zeros((len(dm.actions), game.n_actions[i]))
    E[np.arange(len(dm.actions)), dm.actions[:, i]] = 1.0
    return E


def state_marginalizer(game, i):
    """One-hot map from global state to agent ``i``'s local state, shape (S, S_i)."""
    dm = game.dense
    E = np.zeros((len(dm.states), game.n_states[i]))
    E[np.arange(len(dm.states)), dm.states[:, i]] = 1.0
    return E


def induced_chain(game, profile):
    """State transition matrix ``P^xi[s, s']``."""
    return np.einsum("sa,sat->st", joint_policy(game, profile), game.dense.P)


def induced_sa_chain(game, profile):
    """State-action transition matrix ``P[(s, a), (s', a')]``."""
    dm = game.dense
    Xi = joint_policy(game, profile)
    S, A = Xi.shape
    return (dm.P[:, :, :, None] * Xi[None, None, :, :]).reshape(S * A, S * A)


def _start_vector(game, start):
    S = game.num_states
    if start is None:
        return game.dense.mu
    start = np.asarray(start)
    if start.ndim == 1 and start.size == game.n and start.dtype.kind in "iu":
        v = np.zeros(S)
        v[game.state_index(tuple(start))] = 1.0
        return v
    return start.reshape(S).astype(float)


def _rescale(game, rescale):
    if not rescale:
        return 1.0, 0.0
    lo, hi = game.reward_range
    span = hi - lo if hi > lo else 1.0
    return 1.0 / span, -lo / span


def solve(game, profile, i, rescale=False):
    """Exact Q, averaged Q, V, advantages, J and visitation for agent ``i``.

    With ``rescale=True`` rewards are mapped from ``game.reward_range`` onto [0, 1].
    """
    dm = game.dense
    gamma = game.gamma
    Xi = joint_policy(game, profile)
    Ppi = np.einsum("sa,sat->st", Xi, dm.P)
    scale, shift = _rescale(game, rescale)
    R = scale * dm.R[i] + shift
    S = Ppi.shape[0]
    V = np.linalg.solve(np.eye(S) - gamma * Ppi, np.sum(Xi * R, axis=1))
    Q = R + gamma * dm.P @ V
    E = action_marginalizer(game, i)
    Qbar = (others_policy(game, profile, i) * Q) @ E
    A = Q - V[:, None]
    Abar = Qbar - V[:, None]
    d = (1.0 - gamma) * np.linalg.solve(np.eye(S) - gamma * Ppi.T, dm.mu)
    return ExactSolution(Q, Qbar, V, A, Abar, float(dm.mu @ V), d / d.sum())


def q_function(game, profile, i, rescale=False):
    return solve(game, profile, i, rescale).Q


def averaged_q(game, profile, i, rescale=False):
    return solve(game, profile, i, rescale).Qbar


def q_function_series(game, profile, i, tol=1e-10):
    """Q by truncated power series; an independent route to :func:`q_function`.

    The horizon is the smallest ``T`` with ``gamma^T (r_max - r_min) / (1 - gamma) <= tol``
    after centering rewards at ``r_min``.
    """
    dm = game.dense
    gamma = game.gamma
    lo, hi = game.reward_range
    span = max(hi - lo, 1e-300)
    T = max(1, math.ceil(math.log(tol * (1.0 - gamma) / span) / math.log(gamma)))
    Xi = joint_policy(game, profile)
    R = dm.R[i]
    r_pi = np.sum(Xi * R, axis=1)
    Ppi = np.einsum("sa,sat->st", Xi, dm.P)
    # Q(s,a) = R(s,a) + sum_{t>=1} gamma^t (P Ppi^{t-1} r_pi)(s,a)
    acc = np.zeros_like(r_pi)
    term = r_pi.copy()
    for t in range(T):
        acc += gamma ** t * term
        term = Ppi @ term
    return R + gamma * dm.P @ acc


def objective(game, profile, i, rescale=False):
    """``J_i = E_{s ~ mu} V_i(s)``."""
    dm = game.dense
    Xi = joint_policy(game, profile)
    Ppi = np.einsum("sa,sat->st", Xi, dm.P)
    scale, shift = _rescale(game, rescale)
    r_pi = np.sum(Xi * (scale * dm.R[i] + shift), axis=1)
    V = np.linalg.solve(np.eye(len(r_pi)) - game.gamma * Ppi, r_pi)
    return float(dm.mu @ V)


def objectives(game, profile, rescale=False):
    """All agents' objectives with one factorization of ``I - gamma P^xi``."""
    dm = game.dense
    Xi = joint_policy(game, profile)
    Ppi = np.einsum("sa,sat->st", Xi, dm.P)
    scale, shift = _rescale(game, rescale)
    r_pi = np.einsum("sa,nsa->sn", Xi, scale * dm.R + shift)
    V = np.linalg.solve(np.eye(len(Ppi)) - game.gamma * Ppi, r_pi)
    return dm.mu @ V


def visitation(game, profile, start=None):
    """Discounted visitation ``d = (1 - gamma) (I - gamma P^T)^{-1} start``."""
    Ppi = induced_chain(game, profile)
    v = _start_vector(game, start)
    d = (1.0 - game.gamma) * np.linalg.solve(np.eye(len(v)) - game.gamma * Ppi.T, v)
    return d / d.sum()


# ---------------------------------------------------------------------------
# gradients
# ---------------------------------------------------------------------------


def _profile_of(theta_or_profile):
    if isinstance(theta_or_profile, PolicyProfile):
        return theta_or_profile
    return softmax_profile(theta_or_profile)


def exact_policy_gradient(game, theta, i, rescale=False):
    """Exact ``dJ_i / dtheta_i`` as an ``(|S_i|, |A_i|)`` table.

    Uses ``(1/(1-gamma)) sum_{s_{-i}} d(s) xi_i(a_i|s_i) Abar_i(s, a_i)``.
    """
    profile = softmax_profile(theta)
    sol = solve(game, profile, i, rescale)
    xi_i = profile[i]
    si = game.dense.states[:, i]
    weighted = sol.d[:, None] * xi_i[si] * sol.Abar
    grad = np.zeros_like(xi_i)
    np.add.at(grad, si, weighted)
    return grad / (1.0 - game.gamma)


def trajectory_policy_gradient(game, theta, i, tol=1e-10, rescale=False):
    """Gradient from the trajectory form ``sum_t gamma^t E[grad log xi_i * Qbar_i]``.

    State marginals are propagated forward and the sum is truncated once the
    remaining mass ``sqrt(2) gamma^T max|Qbar| / (1 - gamma)`` drops below ``tol``.
    """
    profile = softmax_profile(theta)
    sol = solve(game, profile, i, rescale)
    xi_i = profile[i]
    si = game.dense.states[:, i]
    Ppi = induced_chain(game, profile)
    gamma = game.gamma
    qmax = max(float(np.max(np.abs(sol.Qbar))), 1e-300)
    T = max(1, math.ceil(math.log(tol * (1.0 - gamma) / (math.sqrt(2.0) * qmax)) / math.log(gamma)))
    # E_{a_i ~ xi_i}[grad log xi_i(a_i|s_i) Qbar(s, a_i)] restricted to row s_i:
    # xi_i(a|s_i) (Qbar(s, a) - sum_b xi_i(b|s_i) Qbar(s, b))
    pi_s = xi_i[si]
    local = pi_s * (sol.Qbar - np.sum(pi_s * sol.Qbar, axis=1, keepdims=True))
    occ = np.zeros(len(si))
    p = game.dense.mu.copy()
    for t in range(T):
        occ += gamma ** t * p
        p = p @ Ppi
    grad = np.zeros_like(xi_i)
    np.add.at(grad, si, occ[:, None] * local)
    return grad


def performance_difference(game, theta, theta_new, i, rescale=False):
    """Right-hand side of the performance-difference identity for agent ``i``.

    ``theta_new`` may differ from ``theta`` only in agent ``i``'s block.
    """
    old = softmax_profile(theta)
    new = softmax_profile(theta_new)
    sol = solve(game, old, i, rescale)
    d_new = visitation(game, new)
    si = game.dense.states[:, i]
    diff = (new[i] - old[i])[si]
    return float(np.sum(d_new[:, None] * diff * sol.Qbar) / (1.0 - game.gamma))


# ---------------------------------------------------------------------------
# best responses and Nash gaps
# ---------------------------------------------------------------------------


def averaged_mdp(game, profile, i, rescale=False):
    """Kernel ``[s, a_i, s']`` and reward ``[s, a_i]`` seen by agent ``i``."""
    dm = game.dense
    W = others_policy(game, profile, i)
    E = action_marginalizer(game, i)
    scale, shift = _rescale(game, rescale)
    P_i = np.einsum("sa,sat,ak->skt", W, dm.P, E)
    r_i = (W * (scale * dm.R[i] + shift)) @ E
    return P_i, r_i


def best_response_upper(game, profile, i, tol=TOL_VI, max_iter=1_000_000, rescale=False):
    """Optimal value of agent ``i`` when it observes the full global state.

    Value iteration to sup-norm change ``tol``; an upper bound on the best
    localized response.
    """
    P_i, r_i = averaged_mdp(game, profile, i, rescale)
    V = np.zeros(P_i.shape[0])
    for _ in range(max_iter):
        V_new = np.max(r_i + game.gamma * P_i @ V, axis=1)
        if np.max(np.abs(V_new - V)) < tol:
            return float(game.dense.mu @ V_new)
        V = V_new
    raise RuntimeError(f"value iteration did not reach tol={tol} in {max_iter} iterations")


def local_response_objective(game, profile, i, rescale=False):
    """Return ``f(theta_i) -> (J_i, grad)`` for agent ``i`` against fixed others."""
    dm = game.dense
    W = others_policy(game, profile, i)
    scale, shift = _rescale(game, rescale)
    R = scale * dm.R[i] + shift
    E = action_marginalizer(game, i)
    P_i = np.einsum("sa,sat,ak->skt", W, dm.P, E)  # (S, A_i, S)
    r_i = (W * R) @ E
    si = dm.states[:, i]
    gamma = game.gamma
    S = len(si)
    eye = np.eye(S)

    def f(theta_i):
        xi = softmax_table(theta_i)
        pi = xi[si]  # (S, A_i)
        Ppi = np.einsum("sk,skt->st", pi, P_i)
        lu = eye - gamma * Ppi
        V = np.linalg.solve(lu, np.sum(pi * r_i, axis=1))
        occ = np.linalg.solve(lu.T, dm.mu)  # unnormalized, sums to 1/(1-gamma)
        Qb = r_i + gamma * P_i @ V
        adv = Qb - V[:, None]
        g = np.zeros_like(xi)
        np.add.at(g, si, occ[:, None] * pi * adv)
        return float(dm.mu @ V), g

    return f


def ascend_response(f, shape, restarts=5, rng=None, init=None, max_iter=500):
    """Maximize a smooth ``f(theta) -> (value, grad)`` with box-bounded L-BFGS restarts.

    The first start is ``init`` when given, then zeros, then standard normal draws.
    Returns the best value found.
    """
    rng = np.random.default_rng(rng)
    starts = []
    if init is not None:
        starts.append(np.clip(np.asarray(init, dtype=float), -THETA_BOX, THETA_BOX))
    starts.append(np.zeros(shape))
    while len(starts) < max(restarts, 1):
        starts.append(rng.standard_normal(shape))
    starts = starts[:max(restarts, 1)]

    def neg(x):
        v, g = f(x.reshape(shape))
        return -v, -g.ravel()

    best = -np.inf
    bounds = [(-THETA_BOX, THETA_BOX)] * int(np.prod(shape))
    for x0 in starts:
        res = minimize(neg, x0.ravel(), jac=True, method="L-BFGS-B", bounds=bounds,
                       options={"maxiter": max_iter, "ftol": 1e-15, "gtol": 1e-12})
        best = max(best, -float(res.fun), f(x0)[0])
    return best


def _log_table(table):
    return np.log(np.maximum(table, 1e-13))


def best_response_local(game, profile, i, restarts=5, steps=500, rng=None, rescale=False):
    """Best localized response of agent ``i`` by exact-gradient ascent with restarts.

    The current policy of agent ``i`` (via its log-probabilities) is the first
    start, so the result never falls below ``J_i`` by more than the box clipping.
    """
    f = local_response_objective(game, profile, i, rescale)
    tables = as_tables(profile)
    return ascend_response(f, tables[i].shape, restarts, rng, init=_log_table(tables[i]), max_iter=steps)


@dataclass
class GapReport:
    gaps: np.ndarray  # clamped per-agent gaps
    raw: np.ndarray  # best response minus J, unclamped
    J: np.ndarray
    best: np.ndarray

    @property
    def global_gap(self):
        return float(np.max(self.gaps))


def ne_gap_report(game, profile, method="local", restarts=5, steps=500, rng=None, rescale=False):
    """NE-gap of every agent. ``method`` is ``"local"`` (default) or ``"upper"``."""
    profile = _profile_of(profile)
    J = objectives(game, profile, rescale)
    rng = np.random.default_rng(rng)
    best = np.empty(game.n)
    for i in range(game.n):
        if method == "local":
            best[i] = best_response_local(game, profile, i, restarts, steps, rng, rescale)
        elif method == "upper":
            best[i] = best_response_upper(game, profile, i, rescale=rescale)
        else:
            raise ValueError(f"unknown best-response method {method!r}")
    raw = best - J
    return GapReport(np.maximum(raw, 0.0), raw, J, best)


def ne_gap(game, profile, i=None, **kwargs):
    """NE-gap of agent ``i``, or the global gap (max over agents) when ``i`` is None."""
    report = ne_gap_report(game, profile, **kwargs)
    return report.global_gap if i is None else float(report.gaps[i])


# ---------------------------------------------------------------------------
# truncation
# ---------------------------------------------------------------------------


def _qbar_tensor(game, profile, i, rescale):
    Qbar = solve(game, _profile_of(profile), i, rescale).Qbar
    return Qbar.reshape(game.n_states + (game.n_actions[i],))


def truncated_q(game, theta, i, kappa_c, u=None, rescale=False):
    """``E_{s_out ~ u}[Qbar_i(s_in, s_out, a_i)]`` over the ``kappa_c``-hop neighborhood.

    ``u`` has shape ``n_states`` of the agents outside the neighborhood (sorted);
    uniform when omitted. Output shape: ``n_states[in] + (|A_i|,)``.
    """
    inside = game.graph.khop(i, kappa_c)
    outside = game.graph.khop_complement(i, kappa_c)
    Q = _qbar_tensor(game, theta, i, rescale)
    Q = np.transpose(Q, inside + outside + (game.n,))
    out_shape = tuple(game.n_states[j] for j in outside)
    if u is None:
        u = np.full(out_shape, 1.0 / max(math.prod(out_shape), 1))
    u = np.asarray(u, dtype=float).reshape(out_shape)
    if np.any(u < 0) or abs(u.sum() - 1.0) > 1e-10:
        raise ValueError("u must be a probability distribution over the outside states")
    k = len(outside)
    Qm = np.moveaxis(Q, -1, len(inside))  # in..., a_i, out...
    return np.tensordot(Qm, u, axes=(list(range(Qm.ndim - k, Qm.ndim)), list(range(k))))


def decay_gap(game, theta, i, kappa_c, rescale=True):
    """Worst truncation error over all outside distributions.

    By linearity the sup is attained at point masses, so it equals the range
    of ``Qbar_i`` over the outside states, maximized over ``(s_in, a_i)``.
    """
    outside = game.graph.khop_complement(i, kappa_c)
    if not outside:
        return 0.0
    Q = _qbar_tensor(game, theta, i, rescale)
    axes = tuple(outside)
    return float(np.max(Q.max(axis=axes) - Q.min(axis=axes)))


def decay_bound(gamma, kappa_c, kappa_r):
    return 2.0 * min(gamma ** (kappa_c - kappa_r + 1), 1.0) / (1.0 - gamma)


# ---------------------------------------------------------------------------
# potential-game checks
# ---------------------------------------------------------------------------


def random_profile(game, rng, scale=2.0):
    theta = [scale * rng.standard_normal((game.n_states[i], game.n_actions[i])) for i in range(game.n)]
    return softmax_profile(theta)


def nmpg_check(game, descriptor, samples=50, rng=None, tol=1e-8):
    """Check ``J_j(xi_j', xi_-j) - J_j(xi) = Phi_i(xi_j', xi_-j) - Phi_i(xi)`` on random draws.

    Pairs ``(i, j)`` are drawn with ``j`` in the ``kappa_G``-hop neighborhood of ``i``.
    Returns a dict with the maximum violation and the worst witness.
    """
    rng = np.random.default_rng(rng)
    worst = 0.0
    witness = None
    for _ in range(samples):
        i = int(rng.integers(game.n))
        hood = game.graph.khop(i, descriptor.kappa_G)
        j = int(hood[rng.integers(len(hood))])
        base = random_profile(game, rng)
        dev = base.replace(j, random_profile(game, rng)[j])
        dJ = objective(game, dev, j) - objective(game, base, j)
        phi = descriptor.local_potentials[i]
        dPhi = phi(as_tables(dev)) - phi(as_tables(base))
        err = abs(dJ - dPhi)
        if err > worst:
            worst, witness = err, {"i": i, "j": j, "dJ": dJ, "dPhi": dPhi}
    return {"passed": worst <= tol, "max_violation": worst, "witness": witness}


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


@dataclass
class Diagnostics:
    D: float
    c_theta: np.ndarray
    pi_min_estimate: float
    lambda_min: np.ndarray
    eps_critic_measured: float | None = None
    eps_app_measured: float | None = None
    eps_red_measured: float | None = None

    def to_dict(self):
        return {"D": self.D, "c_theta": self.c_theta.tolist(), "pi_min_estimate": self.pi_min_estimate,
                "lambda_min": self.lambda_min.tolist(), "eps_critic_measured": self.eps_critic_measured,
                "eps_app_measured": self.eps_app_measured, "eps_red_measured": self.eps_red_measured}


def argmax_mass(game, theta, i, rescale=False):
    """``c_i(theta) = min_s sum_{a_i in argmax Qbar_i(s, .)} xi_i(a_i | s_i)`` with ties within 1e-9."""
    profile = softmax_profile(theta)
    Qbar = solve(game, profile, i, rescale).Qbar
    top = Qbar >= Qbar.max(axis=1, keepdims=True) - TIE_TOL
    pi = profile[i][game.dense.states[:, i]]
    return float(np.min(np.sum(pi * top, axis=1)))


def diagnostics(game, theta, features, kappa_c, eps, critic_weights=None):
    """Constants of the convergence analysis evaluated at ``theta``.

    ``features`` is a list of per-agent :class:`netmpg.critic.FeatureMap`.
    """
    from .subchain import build_subchain, td0_fixed_point

    profile = softmax_profile(theta)
    d = visitation(game, profile)
    D = float(1.0 / d.min()) if d.min() > 0 else math.inf
    c = np.array([argmax_mass(game, theta, i) for i in range(game.n)])
    mixed = epsilon_explore(profile, eps)
    pi_min = math.inf
    lam = np.empty(game.n)
    eps_red = 0.0
    eps_critic = None if critic_weights is None else 0.0
    for i in range(game.n):
        sub = build_subchain(game, mixed, i, kappa_c)
        pi_min = min(pi_min, float(sub.pi_bar.min()))
        Omega = features[i].matrix()
        lam[i] = float(np.linalg.eigvalsh(Omega.T @ (sub.pi_bar[:, None] * Omega)).min())
        fp = td0_fixed_point(sub, Omega)
        eps_red = max(eps_red, fp.eps_red)
        if critic_weights is not None:
            Qbar = solve(game, mixed, i).Qbar.reshape(-1)
            est = (Omega @ critic_weights[i])[sub.project]
            eps_critic = max(eps_critic, float(np.max(np.abs(est - Qbar))))
    return Diagnostics(D, c, pi_min, lam, eps_critic, None, eps_red)


def policy_gradients(game, theta, rescale=False):
    """Exact gradients of every agent, sharing one visitation solve.

    Returns ``(grads, J)`` with ``grads[i]`` shaped like ``theta[i]``.
    """
    dm = game.dense
    gamma = game.gamma
    profile = softmax_profile(theta)
    Xi = joint_policy(game, profile)
    Ppi = np.einsum("sa,sat->st", Xi, dm.P)
    scale, shift = _rescale(game, rescale)
    R = scale * dm.R + shift  # (n, S, A)
    L = np.eye(len(Ppi)) - gamma * Ppi
    V = np.linalg.solve(L, np.einsum("sa,nsa->sn", Xi, R))  # (S, n)
    occ = np.linalg.solve(L.T, dm.mu)  # sums to 1/(1-gamma)
    grads = []
    for i in range(game.n):
        Q = R[i] + gamma * dm.P @ V[:, i]
        Qbar = (others_policy(game, profile, i) * Q) @ action_marginalizer(game, i)
        si = dm.states[:, i]
        pi = profile[i][si]
        g = np.zeros_like(profile[i])
        np.add.at(g, si, occ[:, None] * pi * (Qbar - V[:, i][:, None]))
        grads.append(g)
    return grads, dm.mu @ V
