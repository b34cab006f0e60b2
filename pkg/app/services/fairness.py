import logging
from typing import List, Optional, Sequence, Tuple

from app.core.config import settings
from app.core.errors import InternalInvariantError, UnsupportedProfileError
from app.schemas.instance import Allocation, IdenticalProfile, Instance
from app.schemas.result import RepairResult, TransferRecord
from app.services.instance import validate_allocation
from app.services.welfare import envies

logger = logging.getLogger(__name__)


def _envies(instance: Instance, bundles: Sequence[Sequence[int]], i: int, h: int) -> bool:
    return envies(instance, Allocation(bundles=tuple(tuple(b) for b in bundles)), i, h)


def _round_order(instance: Instance, bundles: Sequence[Sequence[int]]) -> List[int]:
    """Agents by v(x_i)/eta_i ascending, ties by id."""
    return sorted(
        range(instance.n),
        key=lambda a: (instance.bundle_value(a, bundles[a]) / instance.weights[a], a),
    )


def _first_violation(
    instance: Instance, bundles: Sequence[Sequence[int]], order: Sequence[int]
) -> Optional[Tuple[int, int]]:
    for i in order:
        for h in order:
            if _envies(instance, bundles, i, h):
                return i, h
    return None


def _choose_good(instance: Instance, bundles: List[List[int]], i: int, h: int) -> int:
    """Smallest-value good of x_h whose move ends i's envy of h, else the largest one."""
    candidates = sorted(bundles[h], key=lambda g: (instance.good_value(i, g), g))
    for good in candidates:
        trial = [list(b) for b in bundles]
        trial[h].remove(good)
        trial[i].append(good)
        if not _envies(instance, trial, i, h):
            return good
    largest = max(instance.good_value(i, g) for g in candidates)
    return min(g for g in candidates if instance.good_value(i, g) == largest)


def wwef1_repair(instance: Instance, allocation: Allocation) -> RepairResult:
    """
    Move goods from envied to envious agents until the allocation is wwEF1.

    Each round sorts agents by v(x_i)/eta_i, lets the first envious agent i take
    a good from the first agent h it envies, then passes that same good on to
    any agent that newly envies its holder. Every move is from a wwEF1-envied
    agent to its envier, so Nash welfare never decreases.

    Raises:
        UnsupportedProfileError: If valuations are not identical additive
        InternalInvariantError: If the transfer count passes the runaway guard
    """
    if not isinstance(instance.profile, IdenticalProfile):
        raise UnsupportedProfileError("wwEF1 repair needs identical additive valuations")
    validate_allocation(instance, allocation)

    bundles = [list(b) for b in allocation.bundles]
    transfers: List[TransferRecord] = []
    guard = settings.REPAIR_MAX_TRANSFERS_FACTOR * instance.n * max(instance.m, 1)
    round_no = 0

    def move(good: int, source: int, target: int) -> None:
        bundles[source].remove(good)
        bundles[target].append(good)
        transfers.append(TransferRecord(round=round_no, from_agent=source, to_agent=target, good=good))
        if len(transfers) > guard:
            raise InternalInvariantError(f"wwEF1 repair exceeded {guard} transfers")

    while True:
        order = _round_order(instance, bundles)
        violation = _first_violation(instance, bundles, order)
        if violation is None:
            break
        i, h = violation
        good = _choose_good(instance, bundles, i, h)
        logger.debug(f"Round {round_no}: agent {i} envies agent {h}, moving good {good}")

        holder, source = i, h
        while True:
            before = {a for a in order if a != holder and _envies(instance, bundles, a, holder)}
            move(good, source, holder)
            newly = [
                a for a in order
                if a != holder and a not in before and _envies(instance, bundles, a, holder)
            ]
            if not newly:
                break
            source, holder = holder, newly[0]
        round_no += 1

    logger.info(f"wwEF1 repair finished after {round_no} rounds and {len(transfers)} transfers")
    return RepairResult(
        allocation=Allocation.from_bundles(bundles), transfers=tuple(transfers)
    )
