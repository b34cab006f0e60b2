import logging
import math
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

from app.core.errors import UnsupportedProfileError
from app.schemas.instance import Allocation, IdenticalProfile, Instance
from app.schemas.welfare import WelfareValue
from app.services.instance import utilities, validate_allocation

logger = logging.getLogger(__name__)


def log_rational(value: Fraction) -> float:
    """Natural log of a positive rational without a float round-trip."""
    return math.log(value.numerator) - math.log(value.denominator)


def nash_from_utilities(utils: Sequence[Fraction], weights: Sequence[Fraction]) -> WelfareValue:
    """Weighted geometric mean (prod u_i^eta_i)^(1/sum eta) in the log domain."""
    utils = tuple(Fraction(u) for u in utils)
    weights = tuple(Fraction(w) for w in weights)
    if any(u == 0 for u in utils):
        return WelfareValue.zero()
    logs = np.array([log_rational(u) for u in utils])
    eta = np.array([float(w) for w in weights])
    log_value = float(np.dot(eta, logs) / eta.sum()) if len(utils) else 0.0
    return WelfareValue(
        is_zero=False, log_value=log_value, utilities=utils, exponents=weights
    )


def p_mean_from_utilities(utils: Sequence[Fraction], p: float) -> WelfareValue:
    """((1/n) sum u_i^p)^(1/p); p = -inf gives the minimum. p must be nonzero."""
    utils = tuple(Fraction(u) for u in utils)
    if p == -math.inf:
        smallest = min(utils)
        if smallest == 0:
            return WelfareValue.zero("min")
        return WelfareValue(
            is_zero=False, log_value=log_rational(smallest), objective="min", utilities=utils
        )
    positive = [u for u in utils if u > 0]
    if not positive or (p < 0 and len(positive) < len(utils)):
        return WelfareValue.zero("power_sum")
    terms = p * np.array([log_rational(u) for u in positive])
    log_value = float((np.logaddexp.reduce(terms) - math.log(len(utils))) / p)
    power = int(p) if float(p).is_integer() else None
    return WelfareValue(
        is_zero=False,
        log_value=log_value,
        objective="power_sum",
        utilities=utils,
        power=power,
    )


def nash_welfare(instance: Instance, allocation: Allocation) -> WelfareValue:
    """
    Nash welfare of a complete allocation.

    Raises:
        InvalidAllocationError: If bundles overlap, are out of range or incomplete
    """
    validate_allocation(instance, allocation)
    return nash_from_utilities(utilities(instance, allocation), instance.weights)


def require_symmetric(instance: Instance) -> None:
    if len(set(instance.weights)) != 1:
        raise UnsupportedProfileError("p-mean welfare requires equal weights")


def p_mean_welfare(instance: Instance, allocation: Allocation, p: float) -> WelfareValue:
    """
    p-mean welfare; p = 0 is Nash welfare and p = -inf the egalitarian minimum.

    Raises:
        UnsupportedProfileError: If weights are asymmetric and p != 0
    """
    if p == 0:
        return nash_welfare(instance, allocation)
    require_symmetric(instance)
    validate_allocation(instance, allocation)
    return p_mean_from_utilities(utilities(instance, allocation), p)


def objective_welfare(instance: Instance, allocation: Allocation, p: float = 0.0) -> WelfareValue:
    return nash_welfare(instance, allocation) if p == 0 else p_mean_welfare(instance, allocation, p)


def compare_welfare(a: WelfareValue, b: WelfareValue) -> int:
    return a.compare(b)


def envies(instance: Instance, allocation: Allocation, i: int, h: int) -> bool:
    """True if agent i is not wwEF1 towards agent h."""
    if i == h or not allocation.bundles[h]:
        return False
    eta_i, eta_h = instance.weights[i], instance.weights[h]
    own = instance.bundle_value(i, allocation.bundles[i]) / eta_i
    other = instance.bundle_value(i, allocation.bundles[h]) / eta_h
    smaller = min(eta_i, eta_h)
    return all(
        own < other - instance.good_value(i, good) / smaller
        for good in allocation.bundles[h]
    )


def wwef1_violations(instance: Instance, allocation: Allocation) -> List[Tuple[int, int]]:
    """Every ordered pair (i, h) where i wwEF1-envies h; empty iff wwEF1."""
    validate_allocation(instance, allocation)
    return [
        (i, h)
        for i in range(instance.n)
        for h in range(instance.n)
        if envies(instance, allocation, i, h)
    ]


def is_wwef1(instance: Instance, allocation: Allocation) -> bool:
    return not wwef1_violations(instance, allocation)


def order_by_entitlement(instance: Instance, allocation: Allocation) -> Allocation:
    """
    Swap bundles until positive utilities are non-decreasing in the weight order.

    Each swap of agents i < h (ascending weight) with v(x_i) > v(x_h) > 0 keeps
    or raises Nash welfare, so the result is at least as good as the input.
    """
    if not isinstance(instance.profile, IdenticalProfile):
        raise UnsupportedProfileError("ordering by entitlement needs identical valuations")
    validate_allocation(instance, allocation)
    order = sorted(range(instance.n), key=lambda agent: (instance.weights[agent], agent))
    bundles = list(allocation.bundles)
    swapped = True
    while swapped:
        swapped = False
        for a in range(len(order)):
            for b in range(a + 1, len(order)):
                i, h = order[a], order[b]
                v_i = instance.bundle_value(i, bundles[i])
                v_h = instance.bundle_value(h, bundles[h])
                if v_i > v_h > 0:
                    bundles[i], bundles[h] = bundles[h], bundles[i]
                    swapped = True
    return Allocation.from_bundles(bundles)
