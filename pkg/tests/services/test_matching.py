import itertools
from fractions import Fraction
from functools import lru_cache

import numpy as np
import pytest

from app.services.matching import (
    WeightedGraph,
    bipartite_matching,
    is_matching,
    matching_weight,
    max_weight_matching,
)


def brute_force(graph: WeightedGraph):
    weights = {}
    for u, v, w in graph.edges:
        weights[(u, v)] = weights[(v, u)] = w

    @lru_cache(maxsize=None)
    def best(free: int):
        if not free:
            return 0
        u = (free & -free).bit_length() - 1
        rest = free & ~(1 << u)
        result = best(rest)
        for v in range(graph.num_vertices):
            if rest >> v & 1 and (u, v) in weights:
                result = max(result, weights[(u, v)] + best(rest & ~(1 << v)))
        return result

    return best((1 << graph.num_vertices) - 1)


def test_triangle():
    graph = WeightedGraph(num_vertices=3, edges=((0, 1, 1), (1, 2, 1), (0, 2, 1)))
    matching = max_weight_matching(graph)
    assert len(matching) == 1
    assert matching_weight(graph, matching) == 1


def test_path_takes_both_ends():
    graph = WeightedGraph(num_vertices=4, edges=((0, 1, 1), (1, 2, 1), (2, 3, 1)))
    assert max_weight_matching(graph) == {(0, 1), (2, 3)}


def test_odd_cycle():
    graph = WeightedGraph(
        num_vertices=5, edges=((0, 1, 1), (1, 2, 2), (2, 3, 3), (3, 4, 4), (0, 4, 5))
    )
    matching = max_weight_matching(graph)
    assert matching == {(0, 4), (2, 3)}
    assert matching_weight(graph, matching) == 8


def test_negative_edges_are_not_used():
    graph = WeightedGraph(num_vertices=2, edges=((0, 1, -1),))
    assert max_weight_matching(graph) == set()
    assert max_weight_matching(WeightedGraph(num_vertices=3)) == set()


def test_rational_weights():
    graph = WeightedGraph(num_vertices=3, edges=((0, 1, Fraction(1, 3)), (1, 2, Fraction(1, 2))))
    assert max_weight_matching(graph) == {(1, 2)}


def test_float_weights():
    graph = WeightedGraph(num_vertices=3, edges=((0, 1, 0.5), (1, 2, 0.75)))
    assert max_weight_matching(graph) == {(1, 2)}


@pytest.mark.parametrize("seed", range(1000))
def test_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    vertices = 2 + seed % 11
    density = rng.uniform(0.2, 0.9)
    edges = tuple(
        (u, v, int(rng.integers(-5, 11)))
        for u, v in itertools.combinations(range(vertices), 2)
        if rng.random() < density
    )
    graph = WeightedGraph(num_vertices=vertices, edges=edges)
    matching = max_weight_matching(graph)
    assert is_matching(matching)
    assert all(u < v for u, v in matching)
    assert matching_weight(graph, matching) == brute_force(graph)


def test_is_matching():
    assert is_matching([(0, 1), (2, 3)])
    assert not is_matching([(0, 1), (1, 2)])
    assert not is_matching([(1, 1)])
    assert is_matching([])


@pytest.mark.parametrize(
    "edges",
    [((0, 0, 1),), ((0, 1, 1), (1, 0, 2)), ((0, 3, 1),)],
    ids=["loop", "parallel", "out-of-range"],
)
def test_rejects_non_simple_graphs(edges):
    with pytest.raises(ValueError):
        WeightedGraph(num_vertices=3, edges=edges)


def test_weight_lookup():
    graph = WeightedGraph(num_vertices=3, edges=((0, 1, 4),))
    assert graph.weight(1, 0) == 4
    with pytest.raises(KeyError):
        graph.weight(1, 2)


def test_bipartite_matching():
    mate = bipartite_matching({"a": [1, 2], "b": [1]})
    assert mate == {"a": 2, "b": 1}
    assert len(bipartite_matching({"a": [1], "b": [1], "c": []})) == 1
