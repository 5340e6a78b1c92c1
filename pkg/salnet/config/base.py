"""
Application-level settings.

Covers how the tool runs (where artifacts go, evaluation parallelism, logging),
not what an experiment does; experiments are described by ``RunConfig``.
"""

from pathlib import Path

from pydantic import Field
from pydantic_settings import SettingsConfigDict

from salnet.config.config_loader import BaseSettingsWithLoader


class AppSettings(BaseSettingsWithLoader):
    """Runtime settings of the tool."""

    yaml_group = "app"

    environment: str = Field(default="dev", description="Environment (dev/test/prod)")
    runs_dir: Path = Field(default=Path("./runs"), description="Default artifact root")
    eval_workers: int = Field(default=4, ge=1, description="Threads for evaluation episodes")
    pair_chunk: int = Field(
        default=256, ge=1, description="Query-support pairs per batched relation chunk"
    )
    progress: bool = Field(default=True, description="Show rich progress bars on the CLI")

    model_config = SettingsConfigDict(env_prefix="SALNET_APP_")


class LoggingSettings(BaseSettingsWithLoader):
    """Logging settings."""

    yaml_group = "logging"

    level: str = Field(default="INFO", pattern="^(DEBUG|INFO|WARNING|ERROR|CRITICAL)$")
    format: str = Field(default="text", pattern="^(json|text)$")
    file_enabled: bool = False
    file_path: Path = Path("./logs/salnet.log")

    model_config = SettingsConfigDict(env_prefix="SALNET_LOG_")


__all__ = ["AppSettings", "LoggingSettings"]
