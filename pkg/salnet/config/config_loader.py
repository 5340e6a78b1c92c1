"""
Cascading settings loader.

Sources, highest priority first:
1. explicit keyword arguments
2. environment variables (``SALNET_*`` prefixes, optional ``.env``)
3. ``config/app.<ENVIRONMENT>.yaml``
4. ``config/app.yaml``
5. field defaults

The two YAML files are merged per group, so an environment file only needs
the keys it changes.

Example:
    from salnet.config.base import AppSettings

    settings = AppSettings.get_instance()
    print(settings.eval_workers)
"""

import os
from pathlib import Path
from typing import Any, ClassVar, Dict, Optional, Type, TypeVar

import yaml
from pydantic_settings import BaseSettings, SettingsConfigDict

T = TypeVar("T", bound=BaseSettings)


def _read_yaml(path: Path) -> Dict[str, Any]:
    """Parsed mapping, or empty when the file is absent or unreadable."""
    if not path.is_file():
        return {}
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except (OSError, yaml.YAMLError):
        return {}
    return data if isinstance(data, dict) else {}


class ConfigLoader:
    """YAML layers plus the settings singletons, cached per process."""

    _cache: Dict[str, Any] = {}

    YAML_CONFIG_DIR = Path(os.getenv("SALNET_CONFIG_DIR", "config"))
    ENVIRONMENT = os.getenv("ENVIRONMENT", "dev")

    @classmethod
    def layers(cls, filename: str) -> list[Path]:
        """Files consulted for ``filename``, lowest priority first."""
        base = cls.YAML_CONFIG_DIR / filename
        return [base, base.with_name(f"{base.stem}.{cls.ENVIRONMENT}{base.suffix}")]

    @classmethod
    def load_from_yaml(cls, filename: str, group: Optional[str] = None) -> Dict[str, Any]:
        """
        Merged content of ``filename`` and its environment overlay.

        With ``group`` only that top-level mapping is merged and returned.
        """
        key = f"yaml:{filename}:{group}"
        if key not in cls._cache:
            merged: Dict[str, Any] = {}
            for path in cls.layers(filename):
                data = _read_yaml(path)
                section = data.get(group) if group else data
                if isinstance(section, dict):
                    merged.update(section)
            cls._cache[key] = merged
        return dict(cls._cache[key])

    @classmethod
    def clear_cache(cls) -> None:
        """Forget YAML content and settings singletons."""
        cls._cache.clear()


class BaseSettingsWithLoader(BaseSettings):
    """
    Settings group whose defaults come from one YAML group.

    Example:
        class LoggingSettings(BaseSettingsWithLoader):
            yaml_group = "logging"

            level: str = "INFO"
    """

    yaml_group: ClassVar[Optional[str]] = None
    yaml_file: ClassVar[str] = "app.yaml"

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
        case_sensitive=False,
    )

    def __init__(self, **kwargs: Any):
        from_yaml = ConfigLoader.load_from_yaml(self.yaml_file, self.yaml_group) if self.yaml_group else {}
        # init kwargs outrank env vars in pydantic-settings; YAML must not.
        prefix = (self.model_config.get("env_prefix") or "").upper()
        overridden = {name for name in from_yaml if f"{prefix}{name}".upper() in os.environ}
        super().__init__(**{k: v for k, v in from_yaml.items() if k not in overridden}, **kwargs)

    @classmethod
    def get_instance(cls: Type[T]) -> T:
        """Process-wide instance of this group; ``ConfigLoader.clear_cache()`` resets it."""
        key = f"settings:{cls.__name__}"
        instance = ConfigLoader._cache.get(key)
        if instance is None:
            instance = ConfigLoader._cache[key] = cls()
        return instance
