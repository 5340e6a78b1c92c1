import sys
from pathlib import Path

import numpy as np
import pytest

# Ensure `import salnet` works when running tests without installing the package.
ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from salnet.config.config_loader import ConfigLoader  # noqa: E402

TINY_ENCODER = {
    "encoder.f_layers": "4:3:1:1:relu",
    "encoder.g_layers": "4:3:1:1:relu",
    "relation.conv_channels": 2,
    "relation.hidden": 4,
}


@pytest.fixture(autouse=True)
def clean_settings(monkeypatch):
    """Fresh settings singletons, no progress bars, single-threaded evaluation by default."""
    monkeypatch.setenv("SALNET_APP_PROGRESS", "false")
    ConfigLoader.clear_cache()
    yield
    ConfigLoader.clear_cache()


@pytest.fixture(scope="session")
def tiny_dataset():
    """10 synthetic classes x 8 images at 16x16; splits 6 / 1 / 3 classes."""
    from salnet.data.synthetic import generate_synthetic, synthetic_config

    return generate_synthetic(synthetic_config(num_classes=10, images_per_class=8, image_size=16, seed=3))


@pytest.fixture
def tiny_config():
    """A run small enough for a handful of episodes per test."""
    from salnet.config.run_config import RunConfig

    values = {
        "n_way": 3,
        "w_shot": 2,
        "q_train": 2,
        "q_test": 2,
        "episodes_train": 4,
        "episodes_eval": 6,
        "image_size": 16,
        "log_every": 2,
        "ablation_shots": "1",
        "ablation_seeds": "0",
        **TINY_ENCODER,
    }
    return RunConfig.from_flat({key: str(value) for key, value in values.items()})


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
