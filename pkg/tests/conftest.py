import json
from typing import Sequence

import pytest

from app.schemas.instance import (
    AdditiveProfile,
    AgentTable,
    Allocation,
    IdenticalProfile,
    Instance,
    TwoValuableProfile,
)


def identical(values: Sequence, weights: Sequence) -> Instance:
    return Instance(weights=weights, profile=IdenticalProfile(values=values))


def additive(matrix: Sequence[Sequence], weights: Sequence = None) -> Instance:
    weights = weights if weights is not None else [1] * len(matrix)
    return Instance(weights=weights, profile=AdditiveProfile(matrix=matrix))


def two_valuable(num_goods: int, tables: Sequence[dict], weights: Sequence = None) -> Instance:
    weights = weights if weights is not None else [1] * len(tables)
    return Instance(
        weights=weights,
        profile=TwoValuableProfile(
            num_goods=num_goods, tables=[AgentTable(**table) for table in tables]
        ),
    )


def bundles(*goods) -> Allocation:
    return Allocation.from_bundles(goods)


def close(value: float, expected: float, tol: float = 1e-9) -> bool:
    return abs(value - expected) <= tol * max(1.0, abs(expected))


@pytest.fixture
def write_json(tmp_path):
    """Write a JSON document under tmp_path and return its path as a string."""
    def _write(name: str, document) -> str:
        path = tmp_path / name
        path.write_text(document if isinstance(document, str) else json.dumps(document))
        return str(path)
    return _write
