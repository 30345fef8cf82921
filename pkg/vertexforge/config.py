"""
Configuration / Конфигурация

Settings come from the environment (prefix VERTEXFORGE_) and an optional .env file.
Настройки читаются из окружения и файла .env.
"""

import logging
from functools import lru_cache

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Settings(BaseSettings):
    """
    Resource guard and search bounds
    Ограничения ресурсов и границы перебора порядков k, l
    """

    model_config = SettingsConfigDict(
        env_prefix="VERTEXFORGE_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    max_cells: int = Field(default=2_000_000, gt=0, description="Matrix cells and spanning-set size")
    max_order: int = Field(default=8, ge=0, le=32, description="Search bound for the orders k and l")
    log_level: str = Field(default="WARNING", pattern=r"^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$")


@lru_cache
def get_settings() -> Settings:
    """Cached settings; call get_settings.cache_clear() after changing the environment"""
    return Settings()


def configure_logging(level: str) -> None:
    """
    Attach one stderr handler to the vertexforge logger tree
    Обработчик пересоздаётся: sys.stderr мог быть подменён (CliRunner)
    """
    root = logging.getLogger("vertexforge")
    root.setLevel(level)
    for handler in list(root.handlers):
        root.removeHandler(handler)
    handler = logging.StreamHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root.addHandler(handler)
    root.propagate = False
