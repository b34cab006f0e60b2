import logging
from typing import List

import numpy as np

from app.core.errors import ParameterError
from app.schemas.instance import (
    AdditiveProfile,
    AgentTable,
    IdenticalProfile,
    Instance,
    TwoValuableProfile,
)

logger = logging.getLogger(__name__)

KINDS = ("identical", "kary", "two_valuable", "additive")


def _ints(values) -> List[int]:
    return [int(v) for v in values]


def generate_instance(
    kind: str, n: int, m: int, seed: int = 0, value_max: int = 10, k: int = 2
) -> Instance:
    """
    Deterministic random instance for (kind, n, m, seed, value_max).

    Weights are drawn uniformly from {1..n}. `k` bounds the number of
    distinct values of a kary instance.

    Raises:
        ParameterError: For unknown kinds or non-positive sizes
    """
    kind = kind.replace("-", "_")
    if kind not in KINDS:
        raise ParameterError(f"unknown instance kind {kind!r}; choose one of {', '.join(KINDS)}")
    if n < 1 or m < 1:
        raise ParameterError("n and m must be at least 1")
    if value_max < 1 or k < 1:
        raise ParameterError("value_max and k must be at least 1")

    rng = np.random.default_rng(seed)
    weights = _ints(rng.integers(1, n + 1, size=n))

    if kind == "identical":
        profile = IdenticalProfile(values=_ints(rng.integers(1, value_max + 1, size=m)))
    elif kind == "kary":
        palette = rng.choice(np.arange(1, value_max + 1), size=min(k, value_max), replace=False)
        profile = IdenticalProfile(values=_ints(rng.choice(palette, size=m)))
    elif kind == "additive":
        profile = AdditiveProfile(matrix=[_ints(row) for row in rng.integers(0, value_max + 1, size=(n, m))])
    else:
        tables = []
        for _ in range(n):
            size = int(rng.integers(1, min(2, m) + 1))
            goods = sorted(_ints(rng.choice(m, size=size, replace=False)))
            single = _ints(rng.integers(0, value_max + 1, size=size))
            pair = max(single) + int(rng.integers(0, value_max + 1)) if size == 2 else None
            tables.append(AgentTable(goods=goods, single=single, pair=pair))
        profile = TwoValuableProfile(num_goods=m, tables=tables)

    logger.debug(f"Generated {kind} instance n={n} m={m} seed={seed}")
    return Instance(weights=weights, profile=profile)
