"""
Root settings facade.

``Settings`` exposes each settings group through a property that returns the
group's singleton, so ``ConfigLoader.clear_cache()`` followed by new
environment values is seen by every consumer.
"""

from salnet.config.base import AppSettings, LoggingSettings


class Settings:
    """Facade around singleton settings groups."""

    @property
    def app(self) -> AppSettings:
        return AppSettings.get_instance()

    @property
    def logging(self) -> LoggingSettings:
        return LoggingSettings.get_instance()


settings = Settings()

__all__ = ["Settings", "settings"]
