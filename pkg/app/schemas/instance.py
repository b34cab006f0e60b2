from fractions import Fraction
from typing import Annotated, Any, Iterable, List, Literal, Optional, Tuple, Union

from pydantic import (
    AfterValidator,
    BaseModel,
    BeforeValidator,
    ConfigDict,
    Field,
    PlainSerializer,
    model_validator,
)


def to_fraction(value: Any) -> Fraction:
    """
    Coerce a JSON scalar into an exact rational.

    Accepts ints, floats (read through their decimal representation) and
    strings of the form "p/q" or "1.25".
    """
    if isinstance(value, bool):
        raise ValueError("expected a rational, got a boolean")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"'{value}' is not a rational of the form p/q")
    raise ValueError(f"expected a rational, got {type(value).__name__}")


def fraction_to_json(value: Fraction) -> Union[int, str]:
    if value.denominator == 1:
        return value.numerator
    return f"{value.numerator}/{value.denominator}"


def _positive(value: Fraction) -> Fraction:
    if value <= 0:
        raise ValueError("weights must be positive")
    return value


def _nonnegative(value: Fraction) -> Fraction:
    if value < 0:
        raise ValueError("values must be nonnegative")
    return value


_Json = PlainSerializer(fraction_to_json, return_type=Union[int, str])

Rational = Annotated[Fraction, BeforeValidator(to_fraction), _Json]
PositiveRational = Annotated[
    Fraction, BeforeValidator(to_fraction), AfterValidator(_positive), _Json
]
NonNegativeRational = Annotated[
    Fraction, BeforeValidator(to_fraction), AfterValidator(_nonnegative), _Json
]


# Valuation profiles
class AdditiveProfile(BaseModel):
    kind: Literal["additive"] = "additive"
    matrix: Tuple[Tuple[NonNegativeRational, ...], ...]

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _rectangular(self) -> "AdditiveProfile":
        widths = {len(row) for row in self.matrix}
        if len(widths) > 1:
            raise ValueError("matrix rows must all have the same length")
        return self


class IdenticalProfile(BaseModel):
    kind: Literal["identical"] = "identical"
    values: Tuple[NonNegativeRational, ...]

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)


class AgentTable(BaseModel):
    """Valuation of one agent that cares about at most two goods."""
    goods: Tuple[int, ...] = ()
    single: Tuple[NonNegativeRational, ...] = ()
    pair: Optional[NonNegativeRational] = None

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _consistent(self) -> "AgentTable":
        if len(self.goods) > 2:
            raise ValueError("an agent may value at most 2 goods")
        if len(set(self.goods)) != len(self.goods):
            raise ValueError("goods must be distinct")
        if any(good < 0 for good in self.goods):
            raise ValueError("good indices must be nonnegative")
        if len(self.single) != len(self.goods):
            raise ValueError("single must hold one value per good")
        if len(self.goods) == 2:
            if self.pair is None:
                raise ValueError("pair value required when two goods are listed")
            if self.pair < max(self.single):
                raise ValueError("values must be monotone: pair below a single value")
        elif self.pair is not None:
            raise ValueError("pair value given for fewer than two goods")
        return self

    def value(self, bundle: Iterable[int]) -> Fraction:
        bundle = set(bundle)
        held = [k for k, good in enumerate(self.goods) if good in bundle]
        if not held:
            return Fraction(0)
        if len(held) == 2:
            return self.pair
        return self.single[held[0]]


class TwoValuableProfile(BaseModel):
    kind: Literal["two_valuable"] = "two_valuable"
    num_goods: int = Field(..., ge=0)
    tables: Tuple[AgentTable, ...]

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _goods_in_range(self) -> "TwoValuableProfile":
        for table in self.tables:
            if any(good >= self.num_goods for good in table.goods):
                raise ValueError("table references a good beyond num_goods")
        return self


Profile = Annotated[
    Union[AdditiveProfile, IdenticalProfile, TwoValuableProfile],
    Field(discriminator="kind"),
]


class Instance(BaseModel):
    """Agents with entitlements plus a valuation profile over indivisible goods."""
    weights: Tuple[PositiveRational, ...] = Field(..., min_length=1)
    profile: Profile

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @model_validator(mode="after")
    def _dimensions(self) -> "Instance":
        n = len(self.weights)
        profile = self.profile
        if isinstance(profile, AdditiveProfile) and len(profile.matrix) != n:
            raise ValueError(f"matrix has {len(profile.matrix)} rows for {n} agents")
        if isinstance(profile, TwoValuableProfile) and len(profile.tables) != n:
            raise ValueError(f"tables has {len(profile.tables)} entries for {n} agents")
        return self

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def m(self) -> int:
        profile = self.profile
        if isinstance(profile, AdditiveProfile):
            return len(profile.matrix[0]) if profile.matrix else 0
        if isinstance(profile, IdenticalProfile):
            return len(profile.values)
        return profile.num_goods

    @property
    def kind(self) -> str:
        return self.profile.kind

    def good_value(self, agent: int, good: int) -> Fraction:
        """v_ij, the value of a single good."""
        profile = self.profile
        if isinstance(profile, AdditiveProfile):
            return profile.matrix[agent][good]
        if isinstance(profile, IdenticalProfile):
            return profile.values[good]
        return profile.tables[agent].value((good,))

    def bundle_value(self, agent: int, goods: Iterable[int]) -> Fraction:
        profile = self.profile
        if isinstance(profile, TwoValuableProfile):
            return profile.tables[agent].value(goods)
        return sum((self.good_value(agent, good) for good in goods), Fraction(0))

    def additive_matrix(self) -> List[List[Fraction]]:
        """Per-agent per-good values for additive and identical profiles."""
        profile = self.profile
        if isinstance(profile, AdditiveProfile):
            return [list(row) for row in profile.matrix]
        if isinstance(profile, IdenticalProfile):
            return [list(profile.values) for _ in range(self.n)]
        raise TypeError("two-valuable profiles are not additive matrices")


# Allocations
class Allocation(BaseModel):
    bundles: Tuple[Tuple[int, ...], ...]

    model_config = ConfigDict(frozen=True)

    @classmethod
    def from_bundles(cls, bundles: Iterable[Iterable[int]]) -> "Allocation":
        return cls(bundles=tuple(tuple(sorted(bundle)) for bundle in bundles))

    @classmethod
    def from_assignment(cls, assignment: Iterable[int], n: int) -> "Allocation":
        """Build an allocation from an owner-per-good vector."""
        bundles: List[List[int]] = [[] for _ in range(n)]
        for good, agent in enumerate(assignment):
            bundles[agent].append(good)
        return cls.from_bundles(bundles)

    @property
    def n(self) -> int:
        return len(self.bundles)
