"""
Exhaustive exact optimiser, the ground truth for every solver.

Allocations are enumerated as a mixed-radix counter over goods: digit j is
the agent receiving good j and good 0 is the most significant digit, so the
counter runs through assignment vectors in lexicographic order. Blocks of the
counter are evaluated with numpy; the floating scores only shortlist
candidates, the winner is then decided with exact welfare comparison.
"""
import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np

from app.core.config import settings
from app.core.errors import BudgetExceededError
from app.schemas.instance import Allocation, Instance, TwoValuableProfile
from app.schemas.result import OracleResult
from app.schemas.welfare import WelfareValue
from app.services.instance import utilities
from app.services.welfare import (
    nash_from_utilities,
    p_mean_from_utilities,
    require_symmetric,
)

logger = logging.getLogger(__name__)

# Shortlisting slack on float scores; exact comparison decides inside it
_SHORTLIST_TOL = 1e-9


def _digits(indices: np.ndarray, n: int, m: int) -> np.ndarray:
    assignment = np.empty((len(indices), m), dtype=np.int64)
    rest = indices.copy()
    for j in range(m - 1, -1, -1):
        assignment[:, j] = rest % n
        rest //= n
    return assignment


def _utility_evaluator(instance: Instance) -> Callable[[np.ndarray], np.ndarray]:
    n = instance.n
    profile = instance.profile
    if isinstance(profile, TwoValuableProfile):
        tables = []
        for table in profile.tables:
            lut = np.zeros(4)
            if len(table.goods) >= 1:
                lut[1] = float(table.single[0])
            if len(table.goods) == 2:
                lut[2] = float(table.single[1])
                lut[3] = float(table.pair)
            tables.append((table.goods, lut))

        def evaluate(assignment: np.ndarray) -> np.ndarray:
            utils = np.zeros((len(assignment), n))
            for agent, (goods, lut) in enumerate(tables):
                code = np.zeros(len(assignment), dtype=np.int64)
                for k, good in enumerate(goods):
                    code += (assignment[:, good] == agent).astype(np.int64) << k
                utils[:, agent] = lut[code]
            return utils

        return evaluate

    values = np.array([[float(v) for v in row] for row in instance.additive_matrix()])

    def evaluate(assignment: np.ndarray) -> np.ndarray:
        rows = np.arange(len(assignment))
        utils = np.zeros((len(assignment), n))
        for good in range(assignment.shape[1]):
            owners = assignment[:, good]
            utils[rows, owners] += values[owners, good]
        return utils

    return evaluate


def _scores(utils: np.ndarray, weights: np.ndarray, p: float) -> np.ndarray:
    """Log-domain objective per row; -inf marks zero welfare."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        positive = utils > 0
        if p == 0:
            logs = np.where(positive, np.log(np.where(positive, utils, 1.0)), 0.0)
            scores = logs @ weights / weights.sum()
            return np.where(positive.all(axis=1), scores, -np.inf)
        if p == -math.inf:
            smallest = utils.min(axis=1)
            return np.where(smallest > 0, np.log(np.where(smallest > 0, smallest, 1.0)), -np.inf)
        powered = np.where(positive, np.power(np.where(positive, utils, 1.0), p), 0.0)
        mean = powered.mean(axis=1)
        alive = positive.all(axis=1) if p < 0 else positive.any(axis=1)
        return np.where(alive, np.log(np.where(alive, mean, 1.0)) / p, -np.inf)


def brute_force_optimum(
    instance: Instance, p: float = 0.0, cap: Optional[int] = None
) -> OracleResult:
    """
    Exact optimum over all n^m complete allocations.

    Args:
        instance: Any profile
        p: 0 for Nash welfare, otherwise the p-mean exponent (-inf allowed)
        cap: Largest number of allocations to enumerate

    Returns:
        OracleResult with the lexicographically smallest optimal assignment

    Raises:
        BudgetExceededError: If n^m exceeds the cap
        UnsupportedProfileError: If p != 0 and weights are asymmetric
    """
    n, m = instance.n, instance.m
    cap = cap if cap is not None else settings.ORACLE_MAX_ALLOCATIONS
    total = n ** m
    if total > cap:
        raise BudgetExceededError("brute-force sweep over n^m allocations", total, cap)
    if p != 0:
        require_symmetric(instance)

    evaluate = _utility_evaluator(instance)
    weights = np.array([float(w) for w in instance.weights])
    chunk = max(1, settings.ORACLE_CHUNK_SIZE)

    best = -math.inf
    shortlist: List[Tuple[int, float]] = []
    for start in range(0, total, chunk):
        indices = np.arange(start, min(start + chunk, total), dtype=np.int64)
        scores = _scores(evaluate(_digits(indices, n, m)), weights, p)
        best = max(best, float(scores.max()))
        if best == -math.inf:
            continue
        floor = best - _SHORTLIST_TOL * max(1.0, abs(best))
        shortlist = [(index, score) for index, score in shortlist if score >= floor]
        keep = scores >= floor
        shortlist.extend(zip(indices[keep].tolist(), scores[keep].tolist()))

    def exact(index: int) -> Tuple[Allocation, WelfareValue]:
        digits = _digits(np.array([index], dtype=np.int64), n, m)[0].tolist()
        allocation = Allocation.from_assignment(digits, n)
        utils = utilities(instance, allocation)
        if p == 0:
            return allocation, nash_from_utilities(utils, instance.weights)
        return allocation, p_mean_from_utilities(utils, p)

    if not shortlist:
        # every allocation has zero welfare
        best_allocation, best_welfare = exact(0)
    else:
        best_allocation, best_welfare = exact(shortlist[0][0])
        for index, _ in shortlist[1:]:
            allocation, welfare = exact(index)
            if welfare.compare(best_welfare) > 0:
                best_allocation, best_welfare = allocation, welfare

    logger.info(
        f"Oracle swept {total} allocations, {len(shortlist)} shortlisted, "
        f"best log welfare {best_welfare.log_value if not best_welfare.is_zero else '-inf'}"
    )
    return OracleResult(
        best_allocation=best_allocation, best_welfare=best_welfare, enumerated=total
    )
