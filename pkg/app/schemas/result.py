import math
from typing import Any, Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.schemas.instance import Allocation
from app.schemas.welfare import WelfareValue


class Solution(BaseModel):
    """Output of every solver: a complete allocation plus how it was found."""
    method: str
    allocation: Allocation
    welfare: WelfareValue
    zero_welfare: bool = False
    parameters: Dict[str, Any] = Field(default_factory=dict)
    guarantee: str = "exact"

    model_config = ConfigDict(frozen=True)


class OracleResult(BaseModel):
    best_allocation: Allocation
    best_welfare: WelfareValue
    enumerated: int

    model_config = ConfigDict(frozen=True)


class TransferRecord(BaseModel):
    """One move of a good during wwEF1 repair."""
    round: int
    from_agent: int = Field(..., alias="from")
    to_agent: int = Field(..., alias="to")
    good: int

    model_config = ConfigDict(frozen=True, populate_by_name=True)


class RepairResult(BaseModel):
    allocation: Allocation
    transfers: Tuple[TransferRecord, ...] = ()

    model_config = ConfigDict(frozen=True)


class InstanceClass(BaseModel):
    """Instance-type traits: additive, identical, k-ary, k-valued, t-valuable."""
    n: int
    m: int
    profile: str
    additive: bool
    identical: bool
    monotone: bool = True
    symmetric: bool
    k_ary: int
    k_valued: int
    t_valuable: int


# Properties returned to the command line
class WelfareReport(BaseModel):
    is_zero: bool
    log: Optional[float] = None
    value: Optional[float] = None

    @classmethod
    def of(cls, welfare: WelfareValue) -> "WelfareReport":
        if welfare.is_zero:
            return cls(is_zero=True, log=None, value=0.0)
        return cls(is_zero=False, log=welfare.log_value, value=welfare.value)


class SolveReport(BaseModel):
    method: str
    parameters: Dict[str, Any] = Field(default_factory=dict)
    allocation: Allocation
    welfare: WelfareReport
    zero_welfare: bool
    utilities: List[str]
    wwef1: bool
    violations: List[Tuple[int, int]]
    guarantee: str
    repaired_allocation: Optional[Allocation] = None
    repaired_welfare: Optional[WelfareReport] = None
    transfers: Optional[List[TransferRecord]] = None


class CheckReport(BaseModel):
    p: Union[float, str] = 0.0
    welfare: WelfareReport
    utilities: List[str]
    entitlement_ratios: List[str]
    wwef1: bool
    violations: List[Tuple[int, int]]


# Benchmark suites
class BenchCase(BaseModel):
    instance: str
    methods: List[str]
    params: Dict[str, Any] = Field(default_factory=dict)
    repair: bool = False


class BenchParams(BaseModel):
    """Solver parameters of one suite case."""
    epsilon: Optional[float] = None
    lambda_: Optional[int] = Field(None, alias="lambda")
    p: float = 0.0

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    @field_validator("p", mode="before")
    @classmethod
    def _exponent(cls, value: Any) -> Any:
        value = float(value) if isinstance(value, str) else value
        if isinstance(value, float) and (math.isnan(value) or value == math.inf):
            raise ValueError("p must be finite or -inf")
        return value


class BenchSuite(BaseModel):
    cases: List[BenchCase] = Field(default_factory=list)


class BenchRow(BaseModel):
    instance: str
    method: str
    params: str
    welfare_log: str
    oracle_log: str = ""
    ratio: str = ""
    ms: str = ""
    transfers: str = ""
