import logging
from typing import Callable, Dict, Optional

from app.core.config import settings
from app.core.errors import ParameterError, UnsupportedProfileError
from app.schemas.instance import AdditiveProfile, IdenticalProfile, Instance, TwoValuableProfile
from app.schemas.result import Solution
from app.services.fptas import exact_utility_solve, fptas_solve
from app.services.kary import KarySignature, edge_budget, kary_solve
from app.services.oracle import brute_force_optimum
from app.services.ptas import pmean_ptas_solve, ptas_solve
from app.services.two_valuable import solve_two_valuable

logger = logging.getLogger(__name__)

METHODS = ("auto", "ptas", "pmean", "kary", "two_valuable", "fptas", "exact", "oracle")

# Largest agent count the FPTAS is picked for automatically
AUTO_FPTAS_MAX_AGENTS = 4


def normalize_method(method: str) -> str:
    name = method.replace("-", "_")
    if name not in METHODS:
        raise ParameterError(f"unknown method {method!r}; choose one of {', '.join(METHODS)}")
    return name


def select_method(instance: Instance, p: float = 0.0) -> str:
    """
    Pick a solver for the instance's profile.

    Raises:
        UnsupportedProfileError: If no method fits
    """
    profile = instance.profile
    if p != 0:
        if isinstance(profile, IdenticalProfile):
            return "pmean"
        raise UnsupportedProfileError("p-mean welfare needs an identical additive profile")
    if isinstance(profile, TwoValuableProfile):
        return "two_valuable"
    if isinstance(profile, IdenticalProfile):
        if edge_budget(KarySignature.of(instance)) <= settings.SOLVER_BUDGET:
            return "kary"
        return "ptas"
    if isinstance(profile, AdditiveProfile) and instance.n <= AUTO_FPTAS_MAX_AGENTS:
        if all(v.denominator == 1 for row in profile.matrix for v in row):
            return "fptas"
    raise UnsupportedProfileError(
        f"no method fits an additive profile with {instance.n} agents; "
        f"available: oracle, exact (integer values), fptas (integer values)"
    )


def _oracle(instance: Instance, p: float) -> Solution:
    result = brute_force_optimum(instance, p=p)
    return Solution(
        method="oracle",
        allocation=result.best_allocation,
        welfare=result.best_welfare,
        zero_welfare=result.best_welfare.is_zero,
        parameters={"p": p, "enumerated": result.enumerated},
        guarantee="exact",
    )


def solve(
    instance: Instance,
    method: str = "auto",
    epsilon: Optional[float] = None,
    lambda_: Optional[int] = None,
    p: float = 0.0,
) -> Solution:
    """
    Run one solver on an instance.

    Args:
        instance: Parsed instance
        method: One of METHODS; "auto" picks by profile
        epsilon: Approximation parameter for ptas, pmean and fptas
        lambda_: Rounding override for ptas and pmean
        p: Welfare exponent; only pmean and oracle accept p != 0

    Raises:
        ParameterError: For unknown methods or misplaced parameters
        UnsupportedProfileError: If the method cannot handle the instance
    """
    method = normalize_method(method)
    if method == "auto":
        method = select_method(instance, p)
        logger.info(f"Selected method {method}")
    if p != 0 and method not in ("pmean", "oracle"):
        raise ParameterError(f"p={p} is only supported by pmean and oracle")
    eps = settings.DEFAULT_EPSILON if epsilon is None else epsilon
    lam = settings.DEFAULT_LAMBDA if lambda_ is None else lambda_

    dispatch: Dict[str, Callable[[], Solution]] = {
        "ptas": lambda: ptas_solve(instance, eps, lam),
        "pmean": lambda: pmean_ptas_solve(instance, eps, p, lam),
        "kary": lambda: kary_solve(instance),
        "two_valuable": lambda: solve_two_valuable(instance),
        "fptas": lambda: fptas_solve(instance, eps),
        "exact": lambda: exact_utility_solve(instance),
        "oracle": lambda: _oracle(instance, p),
    }
    return dispatch[method]()
