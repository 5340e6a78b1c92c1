"""
Configuration.

- Constants (constants.py)
- Cascading YAML/env loader (config_loader.py)
- Application settings facade (settings.py)
- Experiment configuration (run_config.py, imported directly to keep this
  package free of model imports)

Example:
    from salnet.config import settings

    print(settings.app.eval_workers)
    print(settings.logging.level)
"""

from salnet.config.constants import (
    ABLATION_VARIANTS,
    CHECKPOINT_MAGIC,
    RESULT_COLUMNS,
    TRAIN_LOG_COLUMNS,
    ExitCode,
)
from salnet.config.settings import Settings, settings

__all__ = [
    "settings",
    "Settings",
    "CHECKPOINT_MAGIC",
    "RESULT_COLUMNS",
    "TRAIN_LOG_COLUMNS",
    "ABLATION_VARIANTS",
    "ExitCode",
]
