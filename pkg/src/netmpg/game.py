"""Networked Markov game model and the two concrete environments.

Global states and actions are tuples of per-agent local indices. Whenever a
global quantity is flattened to a single index, the mixed-radix order is
C order over ``n_states`` (agent 0 is the most significant digit), i.e.
``numpy.ravel_multi_index(s, game.n_states)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

from .graph import Graph

ENUM_GUARD = 200_000
PROB_TOL = 1e-12


class StateSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class LocalTable:
    """A table over the local coordinates of ``scope`` agents.

    For kernels the table is indexed ``[s_j for j in scope][a_i][s_i']``;
    for rewards ``[s_j for j in scope][a_j for j in scope]``.
    """

    scope: tuple
    table: np.ndarray


@dataclass(frozen=True)
class DenseModel:
    """Fully enumerated game: every array is indexed by flat global indices."""

    states: np.ndarray  # (S, n) local state indices
    actions: np.ndarray  # (A, n) local action indices
    P: np.ndarray  # (S, A, S)
    R: np.ndarray  # (n, S, A)
    mu: np.ndarray  # (S,)


class NetworkedGame:
    """Finite networked Markov game with factored transitions.

    Parameters
    ----------
    graph : Graph
        Communication graph.
    n_states, n_actions : sequence of int
        Local state/action space sizes.
    kernels : list of LocalTable
        ``kernels[i]`` gives ``P_i(s_i' | s_scope, a_i)``; ``scope`` must lie in
        the one-hop neighborhood of ``i``.
    rewards : list of LocalTable or None
        ``rewards[i]`` gives ``r_i(s_scope, a_scope)`` with ``scope`` inside the
        ``kappa_r``-hop neighborhood. Subclasses computing rewards
        procedurally pass ``None`` and override :meth:`rewards`.
    kappa_r : int
    gamma : float
    mu : array, optional
        Initial distribution over global states, shape ``n_states``.
    start : tuple, optional
        Deterministic initial global state (alternative to ``mu``).
    reward_range : (float, float), optional
        Declared ``[r_min, r_max]``; inferred from the tables when omitted.
    """

    def __init__(self, graph, n_states, n_actions, kernels, rewards, kappa_r, gamma,
                 mu=None, start=None, reward_range=None, state_labels=None,
                 action_labels=None):
        self.graph = graph
        self.n = graph.n
        self.n_states = tuple(int(k) for k in n_states)
        self.n_actions = tuple(int(k) for k in n_actions)
        if len(self.n_states) != self.n or len(self.n_actions) != self.n:
            raise ValueError("local space sizes must have one entry per agent")
        if not 0.0 < gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
        self.gamma = float(gamma)
        self.kappa_r = int(kappa_r)
        self.kernels = [LocalTable(tuple(k.scope), np.asarray(k.table, dtype=float)) for k in kernels]
        self.reward_tables = None if rewards is None else [
            LocalTable(tuple(r.scope), np.asarray(r.table, dtype=float)) for r in rewards]
        self.state_labels = state_labels
        self.action_labels = action_labels
        self._validate_kernels()
        if self.reward_tables is not None:
            self._validate_rewards()
        if (mu is None) == (start is None):
            raise ValueError("give exactly one of mu or start")
        if start is not None:
            self.start = self.validate_state(start)
            self._mu = None
        else:
            mu = np.asarray(mu, dtype=float).reshape(self.n_states)
            if np.any(mu < 0) or abs(mu.sum() - 1.0) > PROB_TOL:
                raise ValueError("mu must be a probability distribution")
            self.start = None
            self._mu = mu
        if reward_range is None:
            if self.reward_tables is None:
                raise ValueError("reward_range is required for procedural rewards")
            lo = min(float(r.table.min()) for r in self.reward_tables)
            hi = max(float(r.table.max()) for r in self.reward_tables)
            reward_range = (lo, hi)
        self.reward_range = (float(reward_range[0]), float(reward_range[1]))
        if self.reward_tables is not None:
            lo, hi = self.reward_range
            for i, r in enumerate(self.reward_tables):
                if r.table.min() < lo - 1e-12 or r.table.max() > hi + 1e-12:
                    raise ValueError(f"reward of agent {i} leaves declared range {self.reward_range}")
        self._kernel_cdf = [np.cumsum(k.table, axis=-1) for k in self.kernels]

    # -- validation --------------------------------------------------------

    def _validate_kernels(self):
        if len(self.kernels) != self.n:
            raise ValueError("need one kernel per agent")
        for i, k in enumerate(self.kernels):
            allowed = set(self.graph.neighbors(i))
            if not set(k.scope) <= allowed:
                raise ValueError(f"kernel scope of agent {i} leaves its neighborhood")
            shape = tuple(self.n_states[j] for j in k.scope) + (self.n_actions[i], self.n_states[i])
            if k.table.shape != shape:
                raise ValueError(f"kernel of agent {i} has shape {k.table.shape}, expected {shape}")
            if np.any(k.table < 0) or np.max(np.abs(k.table.sum(axis=-1) - 1.0)) > PROB_TOL:
                raise ValueError(f"kernel rows of agent {i} are not probability vectors")

    def _validate_rewards(self):
        if len(self.reward_tables) != self.n:
            raise ValueError("need one reward table per agent")
        for i, r in enumerate(self.reward_tables):
            allowed = set(self.graph.khop(i, self.kappa_r))
            if not set(r.scope) <= allowed:
                raise ValueError(f"reward scope of agent {i} leaves its kappa_r-hop neighborhood")
            shape = (tuple(self.n_states[j] for j in r.scope)
                     + tuple(self.n_actions[j] for j in r.scope))
            if r.table.shape != shape:
                raise ValueError(f"reward of agent {i} has shape {r.table.shape}, expected {shape}")

    def validate_state(self, s):
        s = tuple(int(v) for v in s)
        if len(s) != self.n or any(not 0 <= v < k for v, k in zip(s, self.n_states)):
            raise ValueError(f"invalid global state {s}")
        return s

    def validate_action(self, a):
        a = tuple(int(v) for v in a)
        if len(a) != self.n or any(not 0 <= v < k for v, k in zip(a, self.n_actions)):
            raise ValueError(f"invalid global action {a}")
        return a

    # -- sizes -------------------------------------------------------------

    @property
    def num_states(self):
        return math.prod(self.n_states)

    @property
    def num_actions(self):
        return math.prod(self.n_actions)

    @property
    def mu(self):
        if self._mu is None:
            mu = np.zeros(self.n_states)
            mu[self.start] = 1.0
            return mu
        return self._mu

    def state_index(self, s):
        return int(np.ravel_multi_index(tuple(s), self.n_states))

    def action_index(self, a):
        return int(np.ravel_multi_index(tuple(a), self.n_actions))

    # -- dynamics ----------------------------------------------------------

    def kernel_row(self, i, s, a_i):
        k = self.kernels[i]
        return k.table[tuple(s[j] for j in k.scope) + (a_i,)]

    def global_kernel(self, s, a):
        """Exact product distribution over next global states, shape ``n_states``."""
        if self.num_states > ENUM_GUARD:
            raise StateSpaceTooLarge(f"{self.num_states} global states exceed the guard {ENUM_GUARD}")
        s = self.validate_state(s)
        a = self.validate_action(a)
        out = np.ones(())
        for i in range(self.n):
            out = np.multiply.outer(out, self.kernel_row(i, s, a[i]))
        return out

    def step(self, s, a, rng):
        """Sample the next global state; one uniform draw per agent."""
        u = rng.random(self.n)
        nxt = []
        for i in range(self.n):
            k = self.kernels[i]
            cdf = self._kernel_cdf[i][tuple(s[j] for j in k.scope) + (a[i],)]
            nxt.append(min(int(np.searchsorted(cdf, u[i], side="right")), self.n_states[i] - 1))
        return tuple(nxt)

    def sample_initial(self, rng):
        if self.start is not None:
            return self.start
        flat = self._mu.ravel()
        idx = min(int(np.searchsorted(np.cumsum(flat), rng.random(), side="right")), flat.size - 1)
        return tuple(int(v) for v in np.unravel_index(idx, self.n_states))

    # -- rewards -----------------------------------------------------------

    def reward(self, i, s, a):
        r = self.reward_tables[i]
        return float(r.table[tuple(s[j] for j in r.scope) + tuple(a[j] for j in r.scope)])

    def rewards(self, s, a):
        return np.array([self.reward(i, s, a) for i in range(self.n)])

    def rescaled(self):
        """Copy with every reward mapped affinely from ``reward_range`` onto [0, 1]."""
        lo, hi = self.reward_range
        span = hi - lo if hi > lo else 1.0
        tables = [LocalTable(r.scope, (r.table - lo) / span) for r in self.reward_tables]
        return NetworkedGame(self.graph, self.n_states, self.n_actions, self.kernels, tables,
                             self.kappa_r, self.gamma, mu=self._mu, start=self.start,
                             reward_range=(0.0, 1.0), state_labels=self.state_labels,
                             action_labels=self.action_labels)

    # -- enumeration -------------------------------------------------------

    def check_enumerable(self, guard=ENUM_GUARD):
        size = self.num_states * self.num_actions
        if size > guard:
            raise StateSpaceTooLarge(f"|S||A| = {size} exceeds the enumeration guard {guard}")

    @cached_property
    def dense(self):
        """Enumerated kernel and rewards (guarded)."""
        self.check_enumerable()
        states = np.array(list(np.ndindex(*self.n_states)), dtype=int).reshape(-1, self.n)
        actions = np.array(list(np.ndindex(*self.n_actions)), dtype=int).reshape(-1, self.n)
        S, A = len(states), len(actions)
        P = np.ones((S, A))
        for i, k in enumerate(self.kernels):
            rows = k.table[tuple(states[:, j] for j in k.scope)]  # (S, A_i, S_i')
            factor = rows[:, actions[:, i], :]  # (S, A, S_i')
            P = P[..., None] * factor.reshape((S, A) + (1,) * (P.ndim - 2) + (self.n_states[i],))
        P = P.reshape(S, A, S)
        R = np.stack([self._reward_matrix(i, states, actions) for i in range(self.n)])
        return DenseModel(states, actions, P, R, self.mu.ravel().copy())

    def _reward_matrix(self, i, states, actions):
        r = self.reward_tables[i]
        s_idx = tuple(states[:, j][:, None] for j in r.scope)
        a_idx = tuple(actions[:, j][None, :] for j in r.scope)
        return r.table[s_idx + a_idx]

    # -- serialization -----------------------------------------------------

    def to_spec(self):
        spec = {
            "type": "explicit",
            "graph": self.graph.to_dict(),
            "n_states": list(self.n_states),
            "n_actions": list(self.n_actions),
            "kernels": [{"scope": list(k.scope), "table": k.table.tolist()} for k in self.kernels],
            "rewards": [{"scope": list(r.scope), "table": r.table.tolist()} for r in self.reward_tables],
            "kappa_r": self.kappa_r,
            "gamma": self.gamma,
            "reward_range": list(self.reward_range),
        }
        if self.start is not None:
            spec["start"] = list(self.start)
        else:
            spec["mu"] = self._mu.ravel().tolist()
        return spec


def random_game(graph, n_states=2, n_actions=2, kappa_r=1, gamma=0.9, rng=None,
                mu="uniform", concentration=1.0):
    """Random game with Dirichlet kernels over full neighborhoods and uniform [0, 1] rewards."""
    rng = np.random.default_rng(rng)
    n = graph.n
    ns = (n_states,) * n if np.isscalar(n_states) else tuple(n_states)
    na = (n_actions,) * n if np.isscalar(n_actions) else tuple(n_actions)
    kernels, rewards = [], []
    for i in range(n):
        scope = graph.neighbors(i)
        shape = tuple(ns[j] for j in scope) + (na[i],)
        table = rng.dirichlet(np.full(ns[i], concentration), size=shape)
        kernels.append(LocalTable(scope, table))
        rscope = graph.khop(i, kappa_r)
        rshape = tuple(ns[j] for j in rscope) + tuple(na[j] for j in rscope)
        rewards.append(LocalTable(rscope, rng.random(rshape)))
    if isinstance(mu, str) and mu == "uniform":
        mu = np.full(ns, 1.0 / math.prod(ns))
    elif isinstance(mu, str) and mu == "random":
        mu = rng.dirichlet(np.ones(math.prod(ns))).reshape(ns)
    return NetworkedGame(graph, ns, na, kernels, rewards, kappa_r, gamma, mu=mu,
                         reward_range=(0.0, 1.0))


# ---------------------------------------------------------------------------
# Chain example: 1-NMPG that is not an MPG.
# ---------------------------------------------------------------------------

BAD, GOOD = 0, 1


@dataclass(frozen=True)
class NMPGDescriptor:
    """Local potentials of a networked potential game.

    ``local_potentials[i]`` maps a policy profile (list of per-agent
    ``(|S_i|, |A_i|)`` tables) to a real number.
    """

    kappa_G: int
    local_potentials: tuple | None = None
    potential_bounds: tuple | None = None
    nu: object = None


def chain_f(profile, gamma):
    """Closed-form objective of the last chain agent.

    The first agent's "good" action indicator is a two-state Markov chain
    started from the bad state, so the discounted sum of its probabilities
    is ``y / ((1 - g) (1 - g (x - y)))`` with ``x = xi_1(g|g)``,
    ``y = xi_1(g|b)``; the last agent collects reward four steps later.
    """
    x = profile[0][GOOD, GOOD]
    y = profile[0][BAD, GOOD]
    z = profile[3][GOOD, GOOD]
    return gamma ** 4 * z * y / ((1.0 - gamma) * (1.0 - gamma * (x - y)))


def build_chain_example(gamma):
    """Four-agent line game: agent 0 drives itself, agents 1..3 copy their predecessor."""
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    graph = Graph.path(4)
    first = np.zeros((2, 2, 2))  # [s_0, a_0, s_0']: the next state is the action taken
    first[:, BAD, BAD] = 1.0
    first[:, GOOD, GOOD] = 1.0
    kernels = [LocalTable((0,), first)]
    for i in range(1, 4):
        table = np.zeros((2, 2, 2))  # [s_{i-1}, a_i, s_i']
        for s_prev in range(2):
            table[s_prev, :, s_prev] = 1.0
        kernels.append(LocalTable((i - 1,), table))
    rewards = [LocalTable((i,), np.zeros((2, 2))) for i in range(3)]
    last = np.zeros((2, 2))
    last[GOOD, GOOD] = 1.0
    rewards.append(LocalTable((3,), last))
    game = NetworkedGame(graph, (2,) * 4, (2,) * 4, kernels, rewards,
                         kappa_r=0, gamma=gamma, start=(BAD,) * 4, reward_range=(0.0, 1.0),
                         state_labels=[("s_b", "s_g")] * 4, action_labels=[("a_b", "a_g")] * 4)
    zero = lambda profile: 0.0  # noqa: E731
    f = lambda profile: chain_f(profile, gamma)  # noqa: E731
    desc = NMPGDescriptor(kappa_G=1, local_potentials=(zero, zero, f, f),
                          potential_bounds=(0.0, gamma ** 4 / (1.0 - gamma)))
    return game, desc


# ---------------------------------------------------------------------------
# Markov congestion game.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrafficNetwork:
    """Directed traffic graph; self-loops are accepted and mean "wait"."""

    nodes: tuple
    edges: tuple  # (u, v) label pairs; order fixes the out-edge numbering

    def __post_init__(self):
        known = set(self.nodes)
        for u, v in self.edges:
            if u not in known or v not in known:
                raise ValueError(f"edge ({u}, {v}) uses an unknown node")

    def out_edges(self, u):
        """Indices of non-loop edges leaving ``u``, in listing order."""
        return [k for k, (a, b) in enumerate(self.edges) if a == u and b != u]

    def reachable(self, start):
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for k in self.out_edges(u):
                v = self.edges[k][1]
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return [v for v in self.nodes if v in seen]

    def to_dict(self):
        return {"nodes": list(self.nodes), "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(data["nodes"]), tuple(tuple(e) for e in data["edges"]))


def comm_graph_from_traffic(net, agents):
    """Agents are adjacent iff their reachable non-destination node sets meet."""
    zones = [set(net.reachable(h)) - {d} for h, d in agents]
    edges = [(i, j) for i in range(len(agents)) for j in range(i + 1, len(agents))
             if zones[i] & zones[j]]
    return Graph(len(agents), edges)


class CongestionGame(NetworkedGame):
    """Markov congestion game on a traffic network.

    Local state: the agent's current node, restricted to nodes reachable from
    its start. Local action 0 waits; action ``k >= 1`` takes the k-th out-edge
    of the current node, aliased to the last out-edge when ``k`` exceeds the
    out-degree. Destinations are absorbing and reward-free.
    """

    def __init__(self, net, agents, eps_bar, gamma):
        if eps_bar <= 0:
            raise ValueError("eps_bar must be positive")
        self.net = net
        self.agents = [tuple(p) for p in agents]
        self.eps_bar = float(eps_bar)
        n = len(self.agents)
        self.local_nodes = []
        for h, d in self.agents:
            reach = net.reachable(h)
            if d not in reach:
                raise ValueError(f"destination {d} is unreachable from {h}")
            self.local_nodes.append(reach)
        max_out = max(len(net.out_edges(u)) for nodes in self.local_nodes for u in nodes)
        n_act = 1 + max_out
        # edge_of[i][s, a] = traffic-edge index or -1 (wait / absorbed)
        self.edge_of, self.next_of, self.dest_index = [], [], []
        kernels = []
        for i, (h, d) in enumerate(self.agents):
            nodes = self.local_nodes[i]
            pos = {v: k for k, v in enumerate(nodes)}
            edge = np.full((len(nodes), n_act), -1, dtype=int)
            nxt = np.tile(np.arange(len(nodes))[:, None], (1, n_act))
            for s, u in enumerate(nodes):
                outs = net.out_edges(u)
                if u == d or not outs:
                    continue
                for a in range(1, n_act):
                    e = outs[min(a, len(outs)) - 1]
                    edge[s, a] = e
                    nxt[s, a] = pos[net.edges[e][1]]
            table = np.zeros((len(nodes), n_act, len(nodes)))
            for s in range(len(nodes)):
                table[s, np.arange(n_act), nxt[s]] = 1.0
            kernels.append(LocalTable((i,), table))
            self.edge_of.append(edge)
            self.next_of.append(nxt)
            self.dest_index.append(pos[d])
        graph = comm_graph_from_traffic(net, self.agents)
        start = tuple(self.local_nodes[i].index(h) for i, (h, _) in enumerate(self.agents))
        super().__init__(graph, [len(v) for v in self.local_nodes], [n_act] * n, kernels, None,
                         kappa_r=1, gamma=gamma, start=start,
                         reward_range=(-self.eps_bar - n, 0.0),
                         state_labels=[tuple(v) for v in self.local_nodes],
                         action_labels=[tuple(range(n_act))] * n)
        self._affine = (1.0, 0.0)

    def edges_taken(self, s, a):
        return np.array([self.edge_of[i][s[i], a[i]] for i in range(self.n)])

    def rewards(self, s, a):
        e = self.edges_taken(s, a)
        counts = np.bincount(e[e >= 0], minlength=len(self.net.edges))
        at_dest = np.array([s[i] == self.dest_index[i] for i in range(self.n)])
        r = np.where(e >= 0, -self.eps_bar - counts[np.maximum(e, 0)], -self.eps_bar)
        r = np.where(at_dest, 0.0, r)
        scale, shift = self._affine
        return scale * r + shift

    def reward(self, i, s, a):
        return float(self.rewards(s, a)[i])

    def rescaled(self):
        lo, hi = self.reward_range
        other = CongestionGame(self.net, self.agents, self.eps_bar, self.gamma)
        span = hi - lo
        other._affine = (self._affine[0] / span, (self._affine[1] - lo) / span)
        other.reward_range = (0.0, 1.0)
        return other

    def _reward_matrix(self, i, states, actions):
        S, A = len(states), len(actions)
        out = np.empty((S, A))
        for x in range(S):
            s = states[x]
            for y in range(A):
                out[x, y] = self.rewards(s, actions[y])[i]
        return out

    @cached_property
    def dense(self):
        self.check_enumerable()
        states = np.array(list(np.ndindex(*self.n_states)), dtype=int).reshape(-1, self.n)
        actions = np.array(list(np.ndindex(*self.n_actions)), dtype=int).reshape(-1, self.n)
        S, A = len(states), len(actions)
        P = np.ones((S, A))
        for i, k in enumerate(self.kernels):
            factor = k.table[states[:, i]][:, actions[:, i], :]
            P = P[..., None] * factor.reshape((S, A) + (1,) * (P.ndim - 2) + (self.n_states[i],))
        P = P.reshape(S, A, S)
        R = np.empty((self.n, S, A))
        for x in range(S):
            for y in range(A):
                R[:, x, y] = self.rewards(states[x], actions[y])
        return DenseModel(states, actions, P, R, self.mu.ravel().copy())

    def to_spec(self):
        return {"type": "congestion", "traffic_net": self.net.to_dict(),
                "agents": [list(p) for p in self.agents], "eps_bar": self.eps_bar,
                "gamma": self.gamma}


def build_congestion_game(traffic_net, agents, eps_bar, gamma):
    return CongestionGame(traffic_net, agents, eps_bar, gamma)


def appendix_a_network():
    nodes = ("b1", "b2", "b3", "b4", "c1", "c2", "c3", "d")
    edges = (("b1", "c1"), ("b2", "c1"), ("b2", "c2"), ("b3", "c2"), ("b3", "c3"),
             ("b4", "c3"), ("c1", "d"), ("c2", "d"), ("c3", "d"))
    return TrafficNetwork(nodes, edges)


def appendix_a_agents(n_agents=12):
    return [(f"b{math.ceil(k / 3)}", "d") for k in range(1, n_agents + 1)]


def appendix_a_game(gamma=0.9, eps_bar=0.5):
    """Twelve agents on the four-bridge network, agent k starting at b_ceil(k/3)."""
    return CongestionGame(appendix_a_network(), appendix_a_agents(), eps_bar, gamma)


def _edge_counts(game, s, a):
    e = game.edges_taken(s, a)
    return np.bincount(e[e >= 0], minlength=len(game.net.edges))


def stage_potential_congestion(game, s, a, form="rosenthal"):
    """Stage potential of the congestion game.

    ``form="rosenthal"`` returns ``-sum_e N_e (N_e + 1) / 2 - eps_bar * #{j not at
    destination}``, whose unilateral differences match reward differences
    exactly. ``form="paper"`` returns the quadratic ``-sum_e N_e (N_e - 1) / 2``.
    """
    if not isinstance(game, CongestionGame):
        raise TypeError("stage potential is defined for congestion games only")
    counts = _edge_counts(game, s, a).astype(float)
    if form == "paper":
        return float(-0.5 * np.sum(counts * (counts - 1.0)))
    if form != "rosenthal":
        raise ValueError(f"unknown potential form {form!r}")
    active = sum(1 for i in range(game.n) if s[i] != game.dest_index[i])
    scale, _ = game._affine
    # affine reward rescaling: only the slope acts on differences
    return float(scale * (-0.5 * np.sum(counts * (counts + 1.0)) - game.eps_bar * active))


def game_from_spec(spec):
    """Build a game from its JSON description."""
    kind = spec.get("type")
    if kind == "chain":
        return build_chain_example(spec["gamma"])[0]
    if kind == "congestion":
        if spec.get("preset") == "appendix_a":
            return appendix_a_game(spec.get("gamma", 0.9), spec.get("eps_bar", 0.5))
        net = TrafficNetwork.from_dict(spec["traffic_net"])
        return CongestionGame(net, [tuple(p) for p in spec["agents"]], spec["eps_bar"], spec["gamma"])
    if kind == "explicit":
        graph = Graph.from_dict(spec["graph"])
        kernels = [LocalTable(tuple(k["scope"]), np.asarray(k["table"])) for k in spec["kernels"]]
        rewards = [LocalTable(tuple(r["scope"]), np.asarray(r["table"])) for r in spec["rewards"]]
        mu = spec.get("mu")
        return NetworkedGame(graph, spec["n_states"], spec["n_actions"], kernels, rewards,
                             spec["kappa_r"], spec["gamma"],
                             mu=None if mu is None else np.asarray(mu),
                             start=spec.get("start"), reward_range=spec.get("reward_range"))
    raise ValueError(f"unknown game type {kind!r}")
