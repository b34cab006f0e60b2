from app.schemas.instance import (
    AdditiveProfile,
    AgentTable,
    Allocation,
    IdenticalProfile,
    Instance,
    TwoValuableProfile,
)
from app.schemas.welfare import WelfareValue
from app.schemas.params import FptasParams, PtasParams
from app.schemas.result import (
    BenchCase,
    BenchRow,
    BenchSuite,
    CheckReport,
    InstanceClass,
    OracleResult,
    RepairResult,
    Solution,
    SolveReport,
    TransferRecord,
    WelfareReport,
)
