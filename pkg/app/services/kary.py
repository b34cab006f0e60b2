"""Exact Nash welfare for identical k-ary valuations via a DAG over count vectors."""
import itertools
import logging
import math
from collections import defaultdict
from fractions import Fraction
from typing import Dict, Iterator, List, NamedTuple, Tuple

from app.core.config import settings
from app.core.errors import BudgetExceededError, UnsupportedProfileError
from app.schemas.instance import Allocation, IdenticalProfile, Instance
from app.schemas.result import Solution
from app.services.layered_dag import WeightedProduct, best_layered_path
from app.services.welfare import nash_welfare

logger = logging.getLogger(__name__)

CountVector = Tuple[int, ...]


class KarySignature(NamedTuple):
    """Distinct positive values (ascending) and the goods carrying each one."""
    values: Tuple[Fraction, ...]
    goods: Tuple[Tuple[int, ...], ...]

    @classmethod
    def of(cls, instance: Instance) -> "KarySignature":
        if not isinstance(instance.profile, IdenticalProfile):
            raise UnsupportedProfileError("kary needs an identical additive profile")
        classes: Dict[Fraction, List[int]] = defaultdict(list)
        for good, value in enumerate(instance.profile.values):
            if value > 0:
                classes[value].append(good)
        values = tuple(sorted(classes))
        return cls(values, tuple(tuple(classes[v]) for v in values))

    @property
    def counts(self) -> CountVector:
        return tuple(len(goods) for goods in self.goods)

    @property
    def k(self) -> int:
        return len(self.values)

    def value_of(self, counts: CountVector) -> Fraction:
        return sum((c * v for c, v in zip(counts, self.values)), Fraction(0))


def _box(lower: CountVector, upper: CountVector) -> Iterator[CountVector]:
    return itertools.product(*(range(lo, hi + 1) for lo, hi in zip(lower, upper)))


def edge_budget(signature: KarySignature) -> int:
    """Edges between two layers: pairs m <= m' <= totals."""
    return math.prod((t + 1) * (t + 2) // 2 for t in signature.counts)


def kary_solve(instance: Instance) -> Solution:
    """
    Maximum Nash welfare allocation for identical valuations with few distinct values.

    Cost per layer is the number of comparable count-vector pairs, so the
    method is only practical when the number of distinct values is small.

    Raises:
        UnsupportedProfileError: If the profile is not identical additive
        BudgetExceededError: If the count-vector graph exceeds SOLVER_BUDGET edges
    """
    signature = KarySignature.of(instance)
    required = edge_budget(signature)
    if required > settings.SOLVER_BUDGET:
        raise BudgetExceededError("k-ary count-vector graph", required, settings.SOLVER_BUDGET)

    order = sorted(range(instance.n), key=lambda agent: (instance.weights[agent], agent))
    ordered_weights = [instance.weights[agent] for agent in order]
    totals = signature.counts
    zero = tuple(0 for _ in totals)
    everything = list(_box(zero, totals))
    layers = [[zero]] + [everything for _ in range(instance.n - 1)] + [[totals]]

    def successors(i: int, u: CountVector):
        for v in _box(u, totals):
            yield v, signature.value_of(tuple(b - a for a, b in zip(u, v)))

    logger.info(
        f"k-ary solve: k={signature.k}, {len(everything)} count vectors, {required} edges per layer"
    )
    path = best_layered_path(layers, successors, WeightedProduct(ordered_weights))

    unused = [list(goods) for goods in signature.goods]
    bundles: List[List[int]] = [[] for _ in range(instance.n)]
    for position, (before, after) in enumerate(zip(path.vertices, path.vertices[1:])):
        agent = order[position]
        for cls, (a, b) in enumerate(zip(before, after)):
            bundles[agent].extend(unused[cls][: b - a])
            del unused[cls][: b - a]
    zeros = [g for g, v in enumerate(instance.profile.values) if v == 0]
    bundles[0].extend(zeros)

    allocation = Allocation.from_bundles(bundles)
    welfare = nash_welfare(instance, allocation)
    return Solution(
        method="kary",
        allocation=allocation,
        welfare=welfare,
        zero_welfare=welfare.is_zero,
        parameters={"k": signature.k},
        guarantee="exact",
    )
