import logging

from pydantic import field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .config import DEFAULT_SEED, OUT_DIR


class Settings(BaseSettings):
    model_config = SettingsConfigDict(env_prefix="SBURGERS_", env_file=".env", extra="ignore")

    out_dir: str = str(OUT_DIR)
    threads: int = 1
    seed: int = DEFAULT_SEED
    log_level: str = "WARNING"

    @field_validator("log_level")
    @classmethod
    def _known_level(cls, v: str) -> str:
        v = v.strip().upper()
        if v not in logging.getLevelNamesMapping():
            raise ValueError(f"unknown log level {v!r}")
        return v

    @field_validator("threads")
    @classmethod
    def _positive_threads(cls, v: int) -> int:
        if v < 1:
            raise ValueError("threads must be >= 1")
        return v
