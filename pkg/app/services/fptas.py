"""
Utility-vector enumeration for few agents with additive integer valuations.

Goods are handed out one at a time; after good j every reachable vector of
agent utilities is kept (exact enumerator) or only one vector per bucket
class (FPTAS). Buckets are the half-open intervals (alpha^(k-1), alpha^k]
with alpha = 1 + eps/(2m), value 1 in bucket 0 and value 0 in its own bucket.
"""
import logging
from bisect import bisect_left
from fractions import Fraction
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from pydantic import ValidationError

from app.core.config import settings
from app.core.errors import BudgetExceededError, ParameterError, UnsupportedProfileError
from app.schemas.instance import Allocation, Instance, TwoValuableProfile
from app.schemas.params import FptasParams
from app.schemas.result import Solution
from app.schemas.welfare import WelfareValue
from app.services.welfare import nash_from_utilities

logger = logging.getLogger(__name__)


class UtilityVector(NamedTuple):
    utilities: Tuple[int, ...]
    # (index in the previous layer, good, receiving agent)
    parent: Optional[Tuple[int, int, int]] = None


class BucketIndex:
    """Exact bucket lookup against cached rational powers of alpha."""

    def __init__(self, params: FptasParams):
        self.alpha = params.alpha
        self.powers: List[Fraction] = [Fraction(1)]

    def __call__(self, value: int) -> int:
        if value == 0:
            return -1
        while self.powers[-1] < value:
            self.powers.append(self.powers[-1] * self.alpha)
        return bisect_left(self.powers, value)

    def signature(self, utilities: Sequence[int]) -> Tuple[int, ...]:
        return tuple(self(u) for u in utilities)


def integer_matrix(instance: Instance) -> List[List[int]]:
    """
    Raises:
        UnsupportedProfileError: For two-valuable profiles or non-integer values
    """
    if isinstance(instance.profile, TwoValuableProfile):
        raise UnsupportedProfileError("utility enumeration needs an additive profile")
    matrix = instance.additive_matrix()
    if any(v.denominator != 1 for row in matrix for v in row):
        raise UnsupportedProfileError("integer valuations required")
    return [[int(v) for v in row] for row in matrix]


def reduce_vectors(vectors: Sequence[UtilityVector], buckets: BucketIndex) -> List[UtilityVector]:
    """Keep the first vector of every bucket class, in input order."""
    kept: Dict[Tuple[int, ...], UtilityVector] = {}
    for vector in vectors:
        kept.setdefault(buckets.signature(vector.utilities), vector)
    return list(kept.values())


def enumerate_utility_vectors(
    instance: Instance, buckets: Optional[BucketIndex] = None
) -> List[List[UtilityVector]]:
    """
    All layers V_0..V_m of reachable utility vectors.

    With `buckets` every layer is reduced to one representative per class
    before the next good is processed.
    """
    matrix = integer_matrix(instance)
    n, m = instance.n, instance.m
    layers: List[List[UtilityVector]] = [[UtilityVector(tuple(0 for _ in range(n)))]]
    for good in range(m):
        seen: Dict[Tuple[int, ...], UtilityVector] = {}
        for index, vector in enumerate(layers[-1]):
            for agent in range(n):
                utilities = list(vector.utilities)
                utilities[agent] += matrix[agent][good]
                seen.setdefault(tuple(utilities), UtilityVector(tuple(utilities), (index, good, agent)))
        layer = list(seen.values())
        if buckets is not None:
            layer = reduce_vectors(layer, buckets)
        logger.debug(f"Layer {good + 1}: {len(layer)} utility vectors")
        layers.append(layer)
    return layers


def _reconstruct(layers: List[List[UtilityVector]], index: int, n: int) -> Allocation:
    bundles: List[List[int]] = [[] for _ in range(n)]
    for depth in range(len(layers) - 1, 0, -1):
        previous, good, agent = layers[depth][index].parent
        bundles[agent].append(good)
        index = previous
    return Allocation.from_bundles(bundles)


def _best(instance: Instance, layers: List[List[UtilityVector]]) -> Tuple[int, WelfareValue]:
    best_index, best_welfare = 0, None
    for index, vector in enumerate(layers[-1]):
        welfare = nash_from_utilities(vector.utilities, instance.weights)
        if best_welfare is None or welfare.compare(best_welfare) > 0:
            best_index, best_welfare = index, welfare
    return best_index, best_welfare


def _v_max(matrix: List[List[int]]) -> int:
    return max((v for row in matrix for v in row), default=0)


def exact_utility_solve(instance: Instance) -> Solution:
    """
    Maximum Nash welfare by enumerating every reachable utility vector.

    Raises:
        UnsupportedProfileError: If values are not integers
        BudgetExceededError: If (1 + m*v_max)^n exceeds SOLVER_BUDGET
    """
    matrix = integer_matrix(instance)
    required = (1 + instance.m * _v_max(matrix)) ** instance.n
    if required > settings.SOLVER_BUDGET:
        raise BudgetExceededError("exact utility enumeration", required, settings.SOLVER_BUDGET)
    layers = enumerate_utility_vectors(instance)
    index, welfare = _best(instance, layers)
    logger.info(f"Exact enumeration kept {len(layers[-1])} final utility vectors")
    return Solution(
        method="exact",
        allocation=_reconstruct(layers, index, instance.n),
        welfare=welfare,
        zero_welfare=welfare.is_zero,
        guarantee="exact",
    )


def fptas_solve(instance: Instance, epsilon: float) -> Solution:
    """
    (1 - eps)-approximate Nash welfare for additive integer valuations.

    Raises:
        ParameterError: If epsilon is outside (0, 1)
        UnsupportedProfileError: If values are not integers
        BudgetExceededError: If m*n*(buckets per coordinate)^n exceeds SOLVER_BUDGET
    """
    matrix = integer_matrix(instance)
    m = max(instance.m, 1)
    try:
        params = FptasParams(epsilon=epsilon, m=m, v_max=_v_max(matrix))
    except ValidationError as e:
        raise ParameterError(f"epsilon must lie in (0, 1), got {epsilon}") from e

    per_coordinate = min(params.bucket_bound, 1 + instance.m * params.v_max)
    required = instance.m * instance.n * per_coordinate ** instance.n
    if required > settings.SOLVER_BUDGET:
        raise BudgetExceededError("FPTAS utility enumeration", required, settings.SOLVER_BUDGET)

    layers = enumerate_utility_vectors(instance, BucketIndex(params))
    index, welfare = _best(instance, layers)
    logger.info(
        f"FPTAS: alpha={params.alpha}, K={params.k_intervals}, "
        f"{len(layers[-1])} final utility vectors"
    )
    return Solution(
        method="fptas",
        allocation=_reconstruct(layers, index, instance.n),
        welfare=welfare,
        zero_welfare=welfare.is_zero,
        parameters={
            "epsilon": epsilon,
            "alpha": str(params.alpha),
            "k": params.k_intervals,
            "k_reachable": params.bucket_bound - 2,
        },
        guarantee=f"(1-eps) with eps={epsilon}",
    )
