"""
Maximum-weight matching in general graphs.

Thin layer over networkx's primal-dual blossom algorithm. Integer and
rational weights are rescaled to integers by their common denominator so
networkx stays on its exact integer path; float weights are passed through.
"""
import logging
import math
from fractions import Fraction
from numbers import Rational
from typing import Dict, Hashable, Iterable, Set, Tuple, Union

import networkx as nx
from pydantic import BaseModel, ConfigDict, model_validator

logger = logging.getLogger(__name__)

Weight = Union[int, float, Fraction]
Edge = Tuple[int, int]


class WeightedGraph(BaseModel):
    """Simple undirected graph on vertices 0..num_vertices-1."""
    num_vertices: int
    edges: Tuple[Tuple[int, int, Weight], ...] = ()

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _simple(self) -> "WeightedGraph":
        seen: Set[Edge] = set()
        for u, v, _ in self.edges:
            if u == v:
                raise ValueError(f"self loop on vertex {u}")
            if not (0 <= u < self.num_vertices and 0 <= v < self.num_vertices):
                raise ValueError(f"edge ({u}, {v}) leaves the vertex range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError(f"parallel edge ({u}, {v})")
            seen.add(key)
        return self

    def weight(self, u: int, v: int) -> Weight:
        for a, b, w in self.edges:
            if {a, b} == {u, v}:
                return w
        raise KeyError((u, v))


def _exact_scale(weights: Iterable[Weight]) -> int:
    """Common denominator of rational weights, 0 when some weight is a float."""
    scale = 1
    for w in weights:
        if isinstance(w, bool) or not isinstance(w, Rational):
            return 0
        scale = math.lcm(scale, Fraction(w).denominator)
    return scale


def _to_networkx(graph: WeightedGraph) -> nx.Graph:
    scale = _exact_scale(w for _, _, w in graph.edges)
    G = nx.Graph()
    G.add_nodes_from(range(graph.num_vertices))
    for u, v, w in graph.edges:
        weight = int(Fraction(w) * scale) if scale else float(w)
        G.add_edge(u, v, weight=weight)
    return G


def max_weight_matching(graph: WeightedGraph) -> Set[Edge]:
    """
    Maximum-weight (not maximum-cardinality) matching.

    Edges come back as (u, v) with u < v. Negative-weight edges are never used.
    """
    if not graph.edges:
        return set()
    matching = nx.max_weight_matching(_to_networkx(graph), maxcardinality=False)
    result = {(min(u, v), max(u, v)) for u, v in matching}
    logger.debug(f"Matched {len(result)} of {len(graph.edges)} edges")
    return result


def is_matching(edges: Iterable[Edge]) -> bool:
    """No two edges share an endpoint and no edge is a loop."""
    used: Set[int] = set()
    for u, v in edges:
        if u == v or u in used or v in used:
            return False
        used.update((u, v))
    return True


def matching_weight(graph: WeightedGraph, matching: Iterable[Edge]) -> Weight:
    lookup: Dict[Edge, Weight] = {(min(u, v), max(u, v)): w for u, v, w in graph.edges}
    return sum((lookup[(min(u, v), max(u, v))] for u, v in matching), 0)


def bipartite_matching(adjacency: Dict[Hashable, Iterable[Hashable]]) -> Dict[Hashable, Hashable]:
    """Maximum-cardinality matching of left vertices onto right vertices (Hopcroft-Karp)."""
    G = nx.Graph()
    left = [("L", a) for a in adjacency]
    G.add_nodes_from(left)
    for a, neighbours in adjacency.items():
        for b in neighbours:
            G.add_edge(("L", a), ("R", b))
    mate = nx.bipartite.hopcroft_karp_matching(G, top_nodes=left)
    return {a: mate[("L", a)][1] for a in adjacency if ("L", a) in mate}
