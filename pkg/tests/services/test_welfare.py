import math

import pytest

from app.core.errors import InvalidAllocationError, UnsupportedProfileError
from app.services.welfare import (
    compare_welfare,
    is_wwef1,
    nash_welfare,
    order_by_entitlement,
    p_mean_welfare,
    wwef1_violations,
)
from tests.conftest import additive, bundles, close, identical


def test_nash_welfare_weighted_geometric_mean():
    instance = identical([2, 1], weights=[1, 2])
    welfare = nash_welfare(instance, bundles([1], [0]))
    assert not welfare.is_zero
    assert close(welfare.value, 4 ** (1 / 3))


def test_nash_welfare_zero_when_an_agent_gets_nothing():
    instance = identical([2, 1], weights=[1, 2])
    assert nash_welfare(instance, bundles([], [0, 1])).is_zero


def test_nash_welfare_of_unit_utilities_is_one():
    instance = additive([[1, 0], [0, 1]], weights=[3, "1/2"])
    assert close(nash_welfare(instance, bundles([0], [1])).value, 1.0)


def test_nash_welfare_rejects_overlapping_bundles():
    instance = identical([1, 1], weights=[1, 1])
    with pytest.raises(InvalidAllocationError):
        nash_welfare(instance, bundles([0], [0, 1]))


def test_nash_order_invariant_under_weight_scaling():
    a, b = bundles([0], [1, 2]), bundles([0, 1], [2])
    small = identical([3, 2, 2], weights=[1, 2])
    large = identical([3, 2, 2], weights=[7, 14])
    assert compare_welfare(nash_welfare(small, a), nash_welfare(small, b)) == compare_welfare(
        nash_welfare(large, a), nash_welfare(large, b)
    )


@pytest.mark.parametrize("p, expected", [(1, 5.0), (-math.inf, 2.0), (-1, 3.2)])
def test_p_mean_welfare(p, expected):
    instance = identical([2, 8], weights=[1, 1])
    assert close(p_mean_welfare(instance, bundles([0], [1]), p).value, expected)


def test_p_mean_zero_utility_with_negative_p():
    instance = identical([2, 8], weights=[1, 1])
    assert p_mean_welfare(instance, bundles([], [0, 1]), -1).is_zero


def test_p_mean_requires_equal_weights():
    instance = identical([2, 8], weights=[1, 2])
    with pytest.raises(UnsupportedProfileError):
        p_mean_welfare(instance, bundles([0], [1]), 1)


def test_p_zero_delegates_to_nash():
    instance = identical([2, 8], weights=[1, 1])
    allocation = bundles([0], [1])
    assert compare_welfare(p_mean_welfare(instance, allocation, 0), nash_welfare(instance, allocation)) == 0


def test_welfare_values_are_ordered():
    instance = identical([6, 6, 4, 9], weights=[1, 1])
    # 12 * 13 = 156 vs 10 * 15 = 150
    better = nash_welfare(instance, bundles([0, 1], [2, 3]))
    worse = nash_welfare(instance, bundles([0, 2], [1, 3]))
    assert better > worse
    assert compare_welfare(better, better) == 0


def test_single_good_envy_is_removable():
    instance = identical([1], weights=[1, 1])
    assert wwef1_violations(instance, bundles([], [0])) == []


def test_two_goods_held_by_one_agent_violates():
    instance = identical([1, 1], weights=[1, 1])
    assert wwef1_violations(instance, bundles([], [0, 1])) == [(0, 1)]


def test_single_agent_is_always_wwef1():
    instance = identical([5, 1, 2], weights=[3])
    assert is_wwef1(instance, bundles([0, 1, 2]))


def test_weighted_envy_uses_smaller_weight():
    # agent 0 (weight 1) holds 1, agent 1 (weight 3) holds 1+1+1
    instance = identical([1, 1, 1, 1], weights=[1, 3])
    assert wwef1_violations(instance, bundles([0], [1, 2, 3])) == []


def test_order_by_entitlement_swaps_towards_heavier_agents():
    instance = identical([3, 1], weights=[2, 1])
    ordered = order_by_entitlement(instance, bundles([1], [0]))
    assert ordered.bundles == ((0,), (1,))
    assert nash_welfare(instance, ordered) >= nash_welfare(instance, bundles([1], [0]))


def test_order_by_entitlement_needs_identical_values():
    instance = additive([[1, 2], [2, 1]])
    with pytest.raises(UnsupportedProfileError):
        order_by_entitlement(instance, bundles([0], [1]))
