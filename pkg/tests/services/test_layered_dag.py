import math
from fractions import Fraction

import pytest

from app.core.errors import InternalInvariantError
from app.services.layered_dag import (
    Bottleneck,
    PowerSum,
    WeightedProduct,
    aggregation_for,
    best_layered_path,
)


def graph(edges):
    """successors(i, u) from a {(layer, u): [(v, value)]} table."""
    return lambda i, u: [(v, Fraction(value)) for v, value in edges.get((i, u), [])]


def test_parallel_choices_pick_the_larger_value():
    successors = graph({(1, "s"): [("a", 2), ("b", 3)]})
    path = best_layered_path([["s"], ["a", "b"]], successors, WeightedProduct([1]))
    assert path.vertices == ["s", "b"]
    assert path.edge_values == [3]


def test_weights_favor_the_heavier_layer():
    successors = graph({
        (1, "s"): [("x", 2), ("y", 1)],
        (2, "x"): [("t", 1)],
        (2, "y"): [("t", 2)],
    })
    path = best_layered_path([["s"], ["x", "y"], ["t"]], successors, WeightedProduct([1, 2]))
    assert path.vertices == ["s", "y", "t"]


def test_zero_edges_rank_below_positive_paths():
    successors = graph({
        (1, "s"): [("x", 0), ("y", 1)],
        (2, "x"): [("t", 100)],
        (2, "y"): [("t", 1)],
    })
    path = best_layered_path([["s"], ["x", "y"], ["t"]], successors, WeightedProduct([1, 1]))
    assert path.vertices == ["s", "y", "t"]


def test_ties_take_the_smallest_vertex():
    successors = graph({(1, 0): [(2, 5), (1, 5), (3, 5)]})
    path = best_layered_path([[0], [1, 2, 3]], successors, WeightedProduct([1]))
    assert path.vertices == [0, 1]



def test_near_ties_are_decided_exactly():
    big = 10 ** 15
    successors = graph({(1, "s"): [("a", big), ("b", big + 1)]})
    path = best_layered_path([["s"], ["a", "b"]], successors, WeightedProduct([1]))
    assert path.vertices == ["s", "b"]


def test_near_ties_with_fractional_weights():
    big = 10 ** 15
    successors = graph({
        (1, "s"): [("x", big), ("y", big + 1)],
        (2, "x"): [("t", big + 2)],
        (2, "y"): [("t", big + 1)],
    })
    weights = [Fraction(1, 2), Fraction(1, 2)]
    path = best_layered_path([["s"], ["x", "y"], ["t"]], successors, WeightedProduct(weights))
    assert path.vertices == ["s", "y", "t"]
    assert path.score.exact() == (big + 1) ** 2

def test_power_sum_minimises_for_negative_p():
    successors = graph({
        (1, "s"): [("x", 1), ("y", 2)],
        (2, "x"): [("t", 3)],
        (2, "y"): [("t", 2)],
    })
    layers = [["s"], ["x", "y"], ["t"]]
    assert best_layered_path(layers, successors, PowerSum(-1)).vertices == ["s", "y", "t"]
    assert best_layered_path(layers, successors, PowerSum(2)).vertices == ["s", "x", "t"]


def test_bottleneck_maximises_the_minimum():
    successors = graph({
        (1, "s"): [("x", 1), ("y", 2)],
        (2, "x"): [("t", 9)],
        (2, "y"): [("t", 2)],
    })
    path = best_layered_path([["s"], ["x", "y"], ["t"]], successors, Bottleneck())
    assert path.vertices == ["s", "y", "t"]


def test_missing_path_is_an_invariant_error():
    with pytest.raises(InternalInvariantError):
        best_layered_path([["s"], ["t"]], graph({}), WeightedProduct([1]))


@pytest.mark.parametrize(
    "p, kind", [(0, WeightedProduct), (1, PowerSum), (-2, PowerSum), (-math.inf, Bottleneck)]
)
def test_aggregation_for(p, kind):
    assert isinstance(aggregation_for(p, [1, 1]), kind)
