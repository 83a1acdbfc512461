"""Toolkit configuration settings and numeric constants."""

import os
from typing import Literal

from pydantic import AliasChoices, Field
from pydantic_settings import BaseSettings, SettingsConfigDict

TOOL_NAME = "scene-scaffold"
TOOL_VERSION = "0.1.0"

# Numeric tolerances shared by every module
ORTHONORMAL_TOL = 1e-6
UNIT_AXIS_TOL = 1e-9
DEGENERACY_EPS = 1e-6

# LocalCogMap grid
GRID_SIZE = 10
GRID_MAX = GRID_SIZE - 1
ANCHOR_A_CELL = (5, 5)
ANCHOR_B_CELL = (5, 3)

# Referral ambiguity margins
PROXIMITY_MARGIN = 0.05
DIRECTION_MARGIN_DEG = 5.0

EXHAUSTIVE_MAX_OBJECTS = 200

REFERRAL_STRATEGIES = ("proximity", "direction", "temporal")


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="SCAFFOLD_",
        env_file=f".env.{os.getenv('ENVIRONMENT', 'local')}",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Logging
    log_level: str = Field(
        default="WARNING",
        validation_alias=AliasChoices("SCAFFOLD_LOG", "SCAFFOLD_LOG_LEVEL"),
    )
    log_json: bool = False

    # Scene graph generation
    delta: float = Field(default=3.0, gt=0)
    seed: int = Field(default=0, ge=0)

    # Grounding QA referral order
    policy: str = ",".join(REFERRAL_STRATEGIES)

    # Worker processes (one scene per task)
    jobs: int = Field(default=1, ge=1)
    # multiprocessing start method for workers; None uses the platform default
    start_method: Literal["fork", "spawn", "forkserver"] | None = None

    # Histogram bin widths
    cogmap_bin_width: float = Field(default=0.5, gt=0)
    center_bin_width: float = Field(default=0.1, gt=0)
    size_bin_width: float = Field(default=0.1, gt=0)
    yaw_bin_width: float = Field(default=0.1, gt=0)


# Global settings instance
settings = Settings()
