"""
Application configuration and settings.
"""
from typing import Optional

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-level settings loaded from environment variables (prefix ``OIO_``)."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_prefix="OIO_",
        case_sensitive=True,
        extra="ignore",
    )

    # Application
    PROJECT_NAME: str = "Online Inventory Optimization Bench"
    VERSION: str = "1.0.0"

    # Logging
    LOG_LEVEL: str = "INFO"
    LOG_FORMAT: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    AUDIT_LOG_FILE: str = "violations.jsonl"

    # Outputs
    OUTPUT_DIR: str = "results"

    # Worker pool
    MAX_WORKERS: int = 8

    # Randomness
    RNG_ALGORITHM: str = "PCG64"
    RNG_BLOCK_SIZE: int = 4096
    POISSON_INVERSION_MAX_RATE: float = 30.0

    # Numerics
    COMPARISON_TOLERANCE: float = 1e-9
    HINDSIGHT_MAX_ITERATIONS: int = 100_000
    HINDSIGHT_STOP_RATIO: float = 1e-8

    # Statistics
    MIN_CYCLES_FOR_STATS: int = 30
    STAT_SLACK_SIGMAS: float = 3.0
    DEFAULT_DELTA: float = 0.1

    # Gamma sweep
    DEFAULT_GAMMA_POINTS: int = 25
    GAMMA_MIN: float = 1e-5
    GAMMA_MAX: float = 1e1

    # Optional dataset root for relative CSV paths in configs
    DATA_DIR: Optional[str] = None

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Accept any case, store upper case."""
        level = v.upper()
        if level not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Unknown log level: {v}")
        return level

    @field_validator("RNG_ALGORITHM")
    @classmethod
    def validate_rng_algorithm(cls, v: str) -> str:
        if v not in {"PCG64", "PCG64DXSM", "Philox", "SFC64", "MT19937"}:
            raise ValueError(f"Unsupported bit generator: {v}")
        return v


settings = Settings()
