import math
from fractions import Fraction
from functools import reduce
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from app.core.config import settings

# exp() overflows a float beyond this
_MAX_LINEAR_LOG = 709.0


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


class WelfareValue(BaseModel):
    """
    A welfare value kept in the log domain.

    Zero is represented by a flag and sorts below every nonzero value.
    The exact utilities (and exponents) travel along, excluded from dumps,
    so near-ties can be settled by exact rational comparison.
    """
    is_zero: bool
    log_value: float = 0.0
    objective: Literal["nash", "power_sum", "min"] = "nash"
    utilities: Tuple[Fraction, ...] = Field(default=(), exclude=True)
    exponents: Tuple[Fraction, ...] = Field(default=(), exclude=True)
    power: Optional[int] = Field(default=None, exclude=True)

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    @classmethod
    def zero(cls, objective: str = "nash") -> "WelfareValue":
        return cls(is_zero=True, objective=objective)

    @property
    def value(self) -> Optional[float]:
        """Linear welfare, or None when it does not fit in a float."""
        if self.is_zero:
            return 0.0
        if self.log_value > _MAX_LINEAR_LOG:
            return None
        return math.exp(self.log_value)

    def exact_key(self) -> Optional[Fraction]:
        """A rational whose order matches the welfare order, when one exists."""
        if not self.utilities:
            return None
        if self.objective == "nash":
            scale = reduce(_lcm, (e.denominator for e in self.exponents), 1)
            key = Fraction(1)
            for utility, exponent in zip(self.utilities, self.exponents):
                key *= utility ** int(exponent * scale)
            return key
        if self.objective == "min":
            return min(self.utilities)
        if self.power is None:
            return None
        total = sum((u ** self.power for u in self.utilities if u > 0), Fraction(0))
        return total if self.power > 0 else -total

    def compare(self, other: "WelfareValue") -> int:
        """Three-way comparison: -1, 0 or 1."""
        if self.is_zero or other.is_zero:
            return int(other.is_zero) - int(self.is_zero)
        gap = self.log_value - other.log_value
        scale = max(1.0, abs(self.log_value), abs(other.log_value))
        if abs(gap) > settings.WELFARE_REL_TOL * scale:
            return 1 if gap > 0 else -1
        if (
            self.objective == other.objective
            and self.exponents == other.exponents
            and self.power == other.power
        ):
            mine, theirs = self.exact_key(), other.exact_key()
            if mine is not None and theirs is not None:
                return (mine > theirs) - (mine < theirs)
        return 0

    def __lt__(self, other: "WelfareValue") -> bool:
        return self.compare(other) < 0

    def __le__(self, other: "WelfareValue") -> bool:
        return self.compare(other) <= 0

    def __gt__(self, other: "WelfareValue") -> bool:
        return self.compare(other) > 0

    def __ge__(self, other: "WelfareValue") -> bool:
        return self.compare(other) >= 0
