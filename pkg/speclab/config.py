from typing import Optional
from functools import lru_cache

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """
    Numerical policies and runner defaults.
    Values are read from SPECLAB_* environment variables or a .env file.
    """
    # --- Numerical Policies ---
    TOL_FACTOR: float = 64.0
    QUADRATURE_MIN: int = 4096
    QUADRATURE_OVERSAMPLING: int = 8
    CE1_MAGNITUDE_LIMIT: float = 1e300

    # --- Distribution Verdicts ---
    TAU_FLOOR: float = 0.1
    TAU_SCALE: float = 5.0
    TAU_EXPONENT: float = 0.25
    REARRANGEMENT_TOL: float = 0.05
    ZERO_EPS: float = 0.05
    ZERO_ETA: float = 0.05
    HAT_GRID: int = 9
    HAT_MIN_DIAGONAL: float = 1.0

    # --- Runner ---
    OUT_DIR: str = "results"
    SEED: int = 0
    WORKERS: int = 1
    NMAX: Optional[int] = None
    SHOW_PROGRESS: bool = True
    LOG_LEVEL: str = "INFO"

    model_config = SettingsConfigDict(
        env_prefix="SPECLAB_", env_file=".env", env_file_encoding="utf-8", extra="ignore"
    )


@lru_cache()
def get_settings():
    return Settings()


settings = get_settings()
