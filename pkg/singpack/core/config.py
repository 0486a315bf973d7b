from pydantic_settings import BaseSettings, SettingsConfigDict
from typing import Optional
import os


class Settings(BaseSettings):
    PROJECT_NAME: str = "singpack"
    VERSION: str = "1.0.0"

    LOG_LEVEL: str = os.getenv("SINGPACK_LOG_LEVEL", "WARNING")
    LOG_FILE: Optional[str] = os.getenv("SINGPACK_LOG_FILE")
    ENVIRONMENT: str = os.getenv("SINGPACK_ENVIRONMENT", "development")

    # Sampling
    SEED: int = 0
    VERIFY_SAMPLES: int = 10_000
    MONTE_CARLO_SAMPLES: int = 1_000_000

    # Local model tolerances
    LIOUVILLE_TOLERANCE: float = 1e-10
    EXACTNESS_STEP: float = 1e-4
    EXACTNESS_TOLERANCE: float = 1e-6
    PULLBACK_STEP: float = 1e-5
    PULLBACK_TOLERANCE: float = 1e-8
    FLOW_TOLERANCE: float = 1e-6
    BASIN_MARGIN: float = 1e-3
    VOLUME_RELATIVE_TOLERANCE: float = 0.01

    # Toric integration
    RK4_STEP: float = 1e-3
    BOUNDARY_DISTANCE: float = 1e-6
    SEPARATRIX_TOLERANCE: float = 1e-9
    CLASSIFY_MARGIN: float = 1e-6

    SVG_WIDTH: int = 640

    model_config = SettingsConfigDict(case_sensitive=True, env_prefix="SINGPACK_")


def get_settings() -> Settings:
    """Re-read the environment (the CLI calls this on every run)"""
    return Settings()


settings = Settings()
