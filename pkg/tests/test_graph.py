import math

import pytest
from hypothesis import given, strategies as st

from netmpg.graph import Graph


def test_path_distances():
    g = Graph.path(4)
    assert g.dist(0, 3) == 3
    assert g.dist(2, 2) == 0
    assert g.diameter == 3


def test_khop_on_chain():
    g = Graph.path(4)
    assert g.khop(1, 1) == (0, 1, 2)
    assert g.khop(0, 3) == (0, 1, 2, 3)
    assert g.khop(2, 0) == (2,)
    assert g.khop_complement(0, 1) == (2, 3)
    assert g.khop_others(1, 1) == (0, 2)


def test_n_of_kappa():
    assert Graph.path(4).n_of_kappa(1) == 3
    assert Graph.path(4).n_of_kappa(0) == 1
    assert Graph.complete(5).n_of_kappa(1) == 5


def test_disconnected_distance_is_infinite():
    g = Graph(3, [(0, 1)])
    assert g.dist(0, 2) == math.inf
    assert g.khop(2, 10) == (2,)
    assert g.diameter == 1


@pytest.mark.parametrize("edges, exc", [([(0, 0)], ValueError), ([(0, 1), (1, 0)], ValueError),
                                        ([(0, 5)], IndexError)])
def test_invalid_edges(edges, exc):
    with pytest.raises(exc):
        Graph(3, edges)


def test_bad_queries():
    g = Graph.path(3)
    with pytest.raises(IndexError):
        g.khop(7, 1)
    with pytest.raises(ValueError):
        g.khop(0, -1)


def test_roundtrip():
    g = Graph(5, [(0, 3), (1, 2), (3, 4)])
    assert Graph.from_dict(g.to_dict()) == g


@st.composite
def graphs(draw):
    n = draw(st.integers(1, 8))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True)) if pairs else []
    return Graph(n, chosen)


@given(graphs())
def test_distance_symmetry_and_triangle(g):
    for i in range(g.n):
        for j in range(g.n):
            assert g.dist(i, j) == g.dist(j, i)
            for k in range(g.n):
                assert g.dist(i, k) <= g.dist(i, j) + g.dist(j, k)


@given(graphs(), st.integers(0, 6))
def test_khop_is_nested(g, kappa):
    for i in range(g.n):
        inner, outer = set(g.khop(i, kappa)), set(g.khop(i, kappa + 1))
        assert i in inner and inner <= outer
        assert set(g.khop(i, kappa)) | set(g.khop_complement(i, kappa)) == set(range(g.n))
