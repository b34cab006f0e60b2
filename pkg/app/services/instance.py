import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import List, Set, Union

from pydantic import ValidationError

from app.core.errors import InstanceParseError, InvalidAllocationError
from app.schemas.instance import (
    Allocation,
    IdenticalProfile,
    Instance,
    TwoValuableProfile,
)
from app.schemas.result import InstanceClass

logger = logging.getLogger(__name__)


def _field_path(loc: tuple) -> str:
    # discriminated unions put the tag name into the location; drop it
    parts = [str(part) for part in loc if part not in ("additive", "identical", "two_valuable")]
    return ".".join(parts)


def _raise_from_validation(error: ValidationError, document: str) -> None:
    first = error.errors()[0]
    message = first["msg"]
    if message.startswith("Value error, "):
        message = message[len("Value error, "):]
    raise InstanceParseError(message, path=_field_path(first["loc"]) or document) from error


def parse_instance(text: str) -> Instance:
    """
    Parse an instance document.

    Args:
        text: JSON text with "weights" and a "profile" tagged by "kind"

    Returns:
        The validated Instance

    Raises:
        InstanceParseError: If the document violates the schema; the message
            carries the offending field path
    """
    try:
        return Instance.model_validate_json(text)
    except ValidationError as e:
        _raise_from_validation(e, "instance")


def serialize_instance(instance: Instance) -> str:
    return instance.model_dump_json(indent=2)


def load_instance(path: Union[str, Path]) -> Instance:
    return parse_instance(Path(path).read_text())


def parse_allocation(text: str) -> Allocation:
    """Parse `{"bundles": [[...]]}`; a full solve report is accepted too."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceParseError(f"invalid JSON: {e.msg}", path="allocation") from e
    if isinstance(document, dict) and "allocation" in document and "bundles" not in document:
        document = document["allocation"]
    try:
        return Allocation.model_validate(document)
    except ValidationError as e:
        _raise_from_validation(e, "allocation")


def serialize_allocation(allocation: Allocation) -> str:
    return allocation.model_dump_json()


def load_allocation(path: Union[str, Path]) -> Allocation:
    return parse_allocation(Path(path).read_text())


def validate_allocation(instance: Instance, allocation: Allocation, complete: bool = True) -> None:
    """
    Check that bundles are disjoint, in range and (optionally) cover every good.

    Raises:
        InvalidAllocationError: On the first defect found
    """
    if allocation.n != instance.n:
        raise InvalidAllocationError(
            f"allocation has {allocation.n} bundles for {instance.n} agents"
        )
    seen: Set[int] = set()
    for agent, bundle in enumerate(allocation.bundles):
        for good in bundle:
            if good < 0 or good >= instance.m:
                raise InvalidAllocationError(f"agent {agent} holds unknown good {good}")
            if good in seen:
                raise InvalidAllocationError(f"good {good} is allocated twice")
            seen.add(good)
    if complete and len(seen) != instance.m:
        missing = sorted(set(range(instance.m)) - seen)
        raise InvalidAllocationError(f"allocation is not complete, missing goods {missing}")


def utilities(instance: Instance, allocation: Allocation) -> List[Fraction]:
    return [
        instance.bundle_value(agent, bundle)
        for agent, bundle in enumerate(allocation.bundles)
    ]


def classify_instance(instance: Instance) -> InstanceClass:
    """Report which instance types (additive, k-ary, t-valuable, ...) apply."""
    profile = instance.profile
    symmetric = len(set(instance.weights)) == 1
    if isinstance(profile, TwoValuableProfile):
        additive = all(
            len(table.goods) < 2 or table.pair == sum(table.single)
            for table in profile.tables
        )
        per_agent = [
            {value for value in table.single if value > 0} for table in profile.tables
        ]
        influential = [
            sum(
                1 for k in range(len(table.goods))
                if table.single[k] > 0
                or (table.pair is not None and table.pair > table.single[1 - k])
            )
            for table in profile.tables
        ]
        identical = len({table for table in profile.tables}) == 1
        t_valuable = max(influential, default=0)
    else:
        matrix = instance.additive_matrix()
        additive = True
        identical = isinstance(profile, IdenticalProfile) or all(
            row == matrix[0] for row in matrix
        )
        per_agent = [{value for value in row if value > 0} for row in matrix]
        t_valuable = max((sum(1 for v in row if v > 0) for row in matrix), default=0)
    union: Set[Fraction] = set().union(*per_agent) if per_agent else set()
    return InstanceClass(
        n=instance.n,
        m=instance.m,
        profile=instance.kind,
        additive=additive,
        identical=identical,
        symmetric=symmetric,
        k_ary=max((len(values) for values in per_agent), default=0),
        k_valued=len(union),
        t_valuable=t_valuable,
    )
