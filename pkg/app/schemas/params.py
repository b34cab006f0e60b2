import math
from fractions import Fraction
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.schemas.instance import to_fraction

# Smallest lambda for which the configuration-graph bounds are proven
PROVEN_LAMBDA = 12


class PtasParams(BaseModel):
    """Rounding precision of the configuration PTAS: delta = 1/lambda."""
    lambda_: int = Field(..., alias="lambda")
    epsilon: Optional[float] = None

    model_config = ConfigDict(frozen=True, populate_by_name=True)

    @field_validator("lambda_")
    @classmethod
    def _even(cls, value: int) -> int:
        if value < 2 or value % 2:
            raise ValueError("lambda must be an even integer >= 2")
        return value

    @classmethod
    def lambda_for(cls, epsilon: float) -> int:
        """Smallest even integer >= (16 - 8*eps) / eps."""
        eps = to_fraction(epsilon)
        lam = math.ceil((16 - 8 * eps) / eps)
        lam += lam % 2
        return max(lam, 2)

    @classmethod
    def from_epsilon(cls, epsilon: float, lambda_override: Optional[int] = None) -> "PtasParams":
        lam = lambda_override if lambda_override is not None else cls.lambda_for(epsilon)
        return cls(lambda_=lam, epsilon=epsilon)

    @property
    def delta(self) -> Fraction:
        return Fraction(1, self.lambda_)

    @property
    def delta_squared(self) -> Fraction:
        return Fraction(1, self.lambda_ * self.lambda_)

    @property
    def top_level(self) -> int:
        return self.lambda_ * self.lambda_

    def guarantee(self) -> str:
        """The approximation bound actually proven for these parameters."""
        if self.lambda_ < PROVEN_LAMBDA:
            return f"none: lambda={self.lambda_} below {PROVEN_LAMBDA}"
        if self.epsilon is None:
            ratio = Fraction(self.lambda_ - 8, self.lambda_ + 8)
            return f"({ratio.numerator}/{ratio.denominator})-approximate"
        if self.lambda_ < (16 - 8 * to_fraction(self.epsilon)) / to_fraction(self.epsilon):
            return f"none: lambda={self.lambda_} too coarse for epsilon={self.epsilon}"
        return f"(1-eps) with eps={self.epsilon}"


class FptasParams(BaseModel):
    """Bucket geometry of the utility-vector trimming: alpha = 1 + eps/(2m)."""
    epsilon: float = Field(..., gt=0, lt=1)
    m: int = Field(..., ge=1)
    v_max: int = Field(..., ge=0)

    model_config = ConfigDict(frozen=True)

    @property
    def alpha(self) -> Fraction:
        return 1 + to_fraction(self.epsilon) / (2 * self.m)

    @property
    def k_intervals(self) -> int:
        """K = ceil(log_alpha v_max), 0 when v_max <= 1."""
        return self.intervals_up_to(self.v_max)

    @property
    def bucket_bound(self) -> int:
        """Buckets per coordinate over every reachable utility 0..m*v_max."""
        return self.intervals_up_to(self.m * self.v_max) + 2

    def intervals_up_to(self, value: int) -> int:
        if value <= 1:
            return 0
        k, power = 0, Fraction(1)
        while power < value:
            power *= self.alpha
            k += 1
        return k
