"""Networked Markov potential games: exact oracles, localized TD(lambda) and actor-critic."""

from .graph import Graph
from .game import (CongestionGame, LocalTable, NetworkedGame, NMPGDescriptor, TrafficNetwork,
                   appendix_a_game, build_chain_example, build_congestion_game, comm_graph_from_traffic,
                   game_from_spec, random_game, stage_potential_congestion)
from .policy import PolicyProfile, epsilon_explore, log_prob_grad, sample_action, softmax_probs

__all__ = [
    "Graph", "NetworkedGame", "CongestionGame", "LocalTable", "NMPGDescriptor", "TrafficNetwork",
    "appendix_a_game", "build_chain_example", "build_congestion_game", "comm_graph_from_traffic",
    "game_from_spec", "random_game", "stage_potential_congestion", "PolicyProfile", "epsilon_explore",
    "log_prob_grad", "sample_action", "softmax_probs",
]
__version__ = "0.1.0"
