from pydantic_settings import BaseSettings
from typing import Optional

class Settings(BaseSettings):
    # App environment
    app_env: str = "development"

    # Logging
    log_level: Optional[str] = "INFO"
    log_format: Optional[str] = None  # "text" | "json"; derived from app_env when unset

    # Training defaults
    default_learning_rate: float = 0.01
    default_alpha: float = 5.0
    default_dim: int = 75
    default_epochs: int = 1000
    default_norm: str = "L2"
    default_seed: int = 0
    default_threads: int = 1

    # Numerical guards
    singular_condition_limit: float = 1e12
    zero_norm_epsilon: float = 0.0

    # Model directory format
    model_format_version: int = 1

    # Bounded retries
    cv_max_reshuffles: int = 50
    negative_max_attempts: int = 1000

    class Config:
        env_prefix = "MTRANSE_"
        env_file = ".env"
        case_sensitive = False
        extra = "ignore"  # Ignore extra fields in .env

settings = Settings()
