import numpy as np
import pytest

from app.core.errors import UnsupportedProfileError
from app.schemas.instance import Allocation
from app.schemas.result import TransferRecord
from app.services.fairness import wwef1_repair
from app.services.generator import generate_instance
from app.services.oracle import brute_force_optimum
from app.services.ptas import ptas_solve
from app.services.welfare import is_wwef1, nash_welfare
from tests.conftest import additive, bundles, identical


def test_fair_allocation_is_left_alone():
    instance = identical([3, 2, 1], weights=[1, 1])
    allocation = bundles([0], [1, 2])
    result = wwef1_repair(instance, allocation)
    assert result.allocation == allocation
    assert result.transfers == ()


def test_equal_goods_are_shared():
    instance = identical([1, 1], weights=[1, 1])
    result = wwef1_repair(instance, bundles([], [0, 1]))
    assert result.allocation == bundles([0], [1])
    assert result.transfers == (TransferRecord(round=0, from_agent=1, to_agent=0, good=0),)


def test_smallest_sufficient_good_moves():
    instance = identical([4, 1], weights=[1, 1])
    result = wwef1_repair(instance, bundles([], [0, 1]))
    assert result.allocation == bundles([1], [0])
    assert len(result.transfers) == 1


def test_transfer_record_aliases():
    record = TransferRecord(round=2, from_agent=0, to_agent=1, good=3)
    assert record.model_dump(by_alias=True) == {"round": 2, "from": 0, "to": 1, "good": 3}


def _random_start(seed):
    instance = generate_instance("identical", n=2 + seed % 3, m=3 + (seed // 3) % 5, seed=seed, value_max=9)
    owners = np.random.default_rng(seed).integers(0, instance.n, size=instance.m)
    return instance, Allocation.from_assignment(owners.tolist(), instance.n)


@pytest.mark.parametrize("seed", range(300))
def test_repair_reaches_wwef1_without_losing_welfare(seed):
    instance, allocation = _random_start(seed)
    result = wwef1_repair(instance, allocation)
    assert is_wwef1(instance, result.allocation)
    assert nash_welfare(instance, result.allocation).compare(nash_welfare(instance, allocation)) >= 0
    assert sorted(g for b in result.allocation.bundles for g in b) == list(range(instance.m))
    assert len(result.transfers) <= 4 * instance.n * instance.m


@pytest.mark.parametrize("seed", range(300))
def test_every_logged_transfer_keeps_welfare_and_recipients(seed):
    instance, allocation = _random_start(seed)
    result = wwef1_repair(instance, allocation)
    bundles = [list(b) for b in allocation.bundles]
    welfare = nash_welfare(instance, allocation)
    floors = [0] * instance.n
    for position, transfer in enumerate(result.transfers):
        bundles[transfer.from_agent].remove(transfer.good)
        bundles[transfer.to_agent].append(transfer.good)
        after = nash_welfare(instance, Allocation.from_bundles(bundles))
        assert after.compare(welfare) >= 0
        welfare = after
        assert all(len(bundles[a]) >= floors[a] for a in range(instance.n))
        last_of_round = (
            position + 1 == len(result.transfers)
            or result.transfers[position + 1].round != transfer.round
        )
        if last_of_round:
            floors[transfer.to_agent] = len(bundles[transfer.to_agent])
    assert Allocation.from_bundles(bundles) == result.allocation


@pytest.mark.parametrize("seed", range(100))
def test_repairing_the_ptas_result_keeps_its_guarantee(seed):
    instance = generate_instance("identical", n=1 + seed % 3, m=3 + (seed // 3) % 4, seed=seed, value_max=16)
    solution = ptas_solve(instance, 0.8)
    result = wwef1_repair(instance, solution.allocation)
    optimum = brute_force_optimum(instance).best_welfare
    repaired = nash_welfare(instance, result.allocation)
    assert is_wwef1(instance, result.allocation)
    assert repaired.compare(solution.welfare) >= 0
    assert repaired.value >= 0.2 * optimum.value


def test_requires_identical_valuations():
    with pytest.raises(UnsupportedProfileError):
        wwef1_repair(additive([[1, 2], [2, 1]]), bundles([0, 1], []))
