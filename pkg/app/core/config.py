from typing import Optional
from pydantic_settings import BaseSettings, SettingsConfigDict
from dotenv import load_dotenv

load_dotenv()

class Settings(BaseSettings):
    PROJECT_NAME: str = "Asymmetric Nash Welfare Solvers"

    # Logging
    LOG_LEVEL: str = "WARNING"

    # Brute-force oracle
    ORACLE_MAX_ALLOCATIONS: int = 10_000_000
    ORACLE_CHUNK_SIZE: int = 65_536

    # Enumeration budget for kary / fptas / ptas state spaces
    SOLVER_BUDGET: int = 10_000_000

    # Welfare comparison
    WELFARE_REL_TOL: float = 1e-12

    # Approximation defaults
    DEFAULT_EPSILON: float = 0.8
    DEFAULT_LAMBDA: Optional[int] = None

    # wwEF1 repair runaway guard, multiplied by n*m
    REPAIR_MAX_TRANSFERS_FACTOR: int = 16

    # Benchmark runner
    BENCH_WORKERS: int = 4

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",  # Ignore extra fields from .env file
    )


settings = Settings()
