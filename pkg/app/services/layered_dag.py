"""
Best source-to-target paths in layered DAGs.

Layer 0 holds the single source, layer L the targets. Edge values are
rationals (bundle values); an Aggregation turns them into path scores.
Scores are computed backwards (best completion from each vertex) and the
path is then walked forwards taking, at every layer, the smallest successor
that still achieves the optimum. That makes the returned vertex sequence the
lexicographically smallest optimal one.
"""
import logging
import math
from fractions import Fraction
from typing import Any, Callable, Dict, Hashable, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict

from app.core.config import settings
from app.core.errors import InternalInvariantError
from app.services.welfare import log_rational

logger = logging.getLogger(__name__)

Successors = Callable[[int, Hashable], Iterable[Tuple[Hashable, Fraction]]]


class Aggregation:
    """How edge values combine into a path score."""

    def identity(self) -> Any:
        raise NotImplementedError

    def edge(self, layer: int, value: Fraction) -> Any:
        raise NotImplementedError

    def combine(self, head: Any, rest: Any) -> Any:
        raise NotImplementedError

    def better(self, a: Any, b: Any) -> bool:
        """True if score a is strictly better than score b."""
        raise NotImplementedError


def _clearly_greater(a: float, b: float) -> bool:
    return a - b > settings.WELFARE_REL_TOL * max(1.0, abs(a), abs(b))


class ProductScore(NamedTuple):
    """Zero-edge count, float log of the positive part, exact factors as a cons list."""
    zeros: int
    log: float
    factors: Optional[tuple]

    def exact(self) -> Fraction:
        product, node = Fraction(1), self.factors
        while node is not None:
            value, exponent, node = node
            product *= value ** exponent
        return product


class WeightedProduct(Aggregation):
    """
    Maximise prod value_i^eta_i; empty bundles are a zero sentinel below every positive path.

    Logs decide clear cases. Within WELFARE_REL_TOL the products are compared
    exactly, raised to the common denominator of the weights.
    """

    def __init__(self, weights: Sequence[Fraction]):
        weights = [Fraction(w) for w in weights]
        scale = math.lcm(*(w.denominator for w in weights)) if weights else 1
        self.weights = [float(w) for w in weights]
        self.exponents = [int(w * scale) for w in weights]

    def identity(self) -> ProductScore:
        return ProductScore(0, 0.0, None)

    def edge(self, layer: int, value: Fraction) -> ProductScore:
        if value == 0:
            return ProductScore(1, 0.0, None)
        return ProductScore(
            0,
            self.weights[layer - 1] * log_rational(value),
            (Fraction(value), self.exponents[layer - 1], None),
        )

    def combine(self, head: ProductScore, rest: ProductScore) -> ProductScore:
        factors = rest.factors
        if head.factors is not None:
            value, exponent, _ = head.factors
            factors = (value, exponent, factors)
        return ProductScore(head.zeros + rest.zeros, head.log + rest.log, factors)

    def better(self, a: ProductScore, b: ProductScore) -> bool:
        if a.zeros != b.zeros:
            return a.zeros < b.zeros
        if _clearly_greater(a.log, b.log):
            return True
        if _clearly_greater(b.log, a.log):
            return False
        return a.exact() > b.exact()


class PowerSum(Aggregation):
    """Maximise sum value^p for p > 0, minimise it for p < 0."""

    def __init__(self, p: float):
        if p == 0 or math.isinf(p):
            raise ValueError("PowerSum needs a finite nonzero exponent")
        self.p = p

    def identity(self) -> float:
        return 0.0

    def edge(self, layer: int, value: Fraction) -> float:
        if value == 0:
            return math.inf if self.p < 0 else 0.0
        return math.exp(self.p * log_rational(value))

    def combine(self, head: float, rest: float) -> float:
        return head + rest

    def better(self, a: float, b: float) -> bool:
        if self.p > 0:
            return _clearly_greater(a, b)
        if math.isinf(a) or math.isinf(b):
            return a < b
        return _clearly_greater(b, a)


class Bottleneck(Aggregation):
    """Maximise the smallest edge value."""

    def identity(self) -> float:
        return math.inf

    def edge(self, layer: int, value: Fraction) -> float:
        return float(value)

    def combine(self, head: float, rest: float) -> float:
        return min(head, rest)

    def better(self, a: float, b: float) -> bool:
        if math.isinf(a) or math.isinf(b):
            return a > b
        return _clearly_greater(a, b)


def aggregation_for(p: float, weights: Sequence[Fraction]) -> Aggregation:
    if p == 0:
        return WeightedProduct(weights)
    if p == -math.inf:
        return Bottleneck()
    return PowerSum(p)


class LayeredPath(BaseModel):
    vertices: List[Any]
    edge_values: List[Fraction]
    score: Any

    model_config = ConfigDict(arbitrary_types_allowed=True)


def best_layered_path(
    layers: Sequence[Sequence[Hashable]],
    successors: Successors,
    aggregation: Aggregation,
) -> LayeredPath:
    """
    Best path from the source (layers[0][0]) to any vertex of the last layer.

    Args:
        layers: Vertices per layer; vertices must be mutually orderable
        successors: successors(i, u) yields (v, value) for edges u -> v into layer i
        aggregation: Scoring rule

    Raises:
        InternalInvariantError: If no source-to-target path exists
    """
    last = len(layers) - 1
    completion: List[Dict[Hashable, Any]] = [dict() for _ in layers]
    completion[last] = {vertex: aggregation.identity() for vertex in layers[last]}

    for i in range(last, 0, -1):
        ahead = completion[i]
        for u in layers[i - 1]:
            best = None
            for v, value in successors(i, u):
                if v not in ahead:
                    continue
                candidate = aggregation.combine(aggregation.edge(i, value), ahead[v])
                if best is None or aggregation.better(candidate, best):
                    best = candidate
            if best is not None:
                completion[i - 1][u] = best

    source = layers[0][0]
    if source not in completion[0]:
        raise InternalInvariantError("layered graph has no source-to-target path")

    vertices, values = [source], []
    u = source
    for i in range(1, last + 1):
        target_score = completion[i - 1][u]
        options = sorted(
            ((v, value) for v, value in successors(i, u) if v in completion[i]),
            key=lambda option: option[0],
        )
        for v, value in options:
            candidate = aggregation.combine(aggregation.edge(i, value), completion[i][v])
            if not aggregation.better(target_score, candidate):
                vertices.append(v)
                values.append(value)
                u = v
                break
        else:
            raise InternalInvariantError(f"lost the optimal path at layer {i}")

    logger.debug(f"Best layered path over {last} layers, score {completion[0][source]}")
    return LayeredPath(vertices=vertices, edge_values=values, score=completion[0][source])
