import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from netmpg.game import random_game
from netmpg.graph import Graph

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def line3(rng):
    return random_game(Graph.path(3), gamma=0.9, rng=rng)


@pytest.fixture
def line2(rng):
    return random_game(Graph.path(2), gamma=0.9, rng=rng)


def random_theta(game, rng, scale=1.0):
    return [scale * rng.standard_normal((game.n_states[i], game.n_actions[i])) for i in range(game.n)]
