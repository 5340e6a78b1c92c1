"""
Pipeline constants.

Magic numbers and fixed schemas live here so the modules share one definition.
"""

import math
from enum import IntEnum
from typing import Final

# =======================
# Checkpoint format
# =======================

CHECKPOINT_MAGIC: Final[bytes] = b"SALNET01"
"""First eight bytes of every checkpoint file"""

# =======================
# Optimizer
# =======================

ADAM_LR: Final[float] = 1e-3
ADAM_BETAS: Final[tuple[float, float]] = (0.9, 0.999)
ADAM_EPS: Final[float] = 1e-8

# =======================
# Gradient checking
# =======================

GRADCHECK_STEP: Final[float] = 1e-5
GRADCHECK_TOLERANCE: Final[float] = 1e-4
GRADCHECK_FLOOR: Final[float] = 1e-6
"""Denominator floor of the relative error, so two near-zero gradients compare absolutely"""

# =======================
# Synthetic corpus
# =======================

FG_AREA_BOUNDS: Final[tuple[float, float]] = (0.05, 0.40)
"""Admissible foreground area fraction of a generated image"""

ALPHA_THRESHOLD: Final[float] = 0.5
SUPERSAMPLE: Final[int] = 4
"""Subpixel grid per axis used to antialias the alpha matte"""

# =======================
# Saliency
# =======================

REFERENCE_IMAGE_SIZE: Final[int] = 32
"""Image size at which the default dilation radii are expressed"""

DEFAULT_DILATION_RADII: Final[tuple[float, ...]] = (1.0, 2.5)
DEFAULT_DILATION_THRESHOLD: Final[float] = 0.5
DILATION_TRUNCATE: Final[float] = 3.0

HEURISTIC_MIN_SIZE: Final[int] = 8

# =======================
# Bounded nonlinearities
# =======================

UNIT_BOUND: Final[float] = math.nextafter(1.0, 0.0)
"""Largest float below 1; tanh and psi outputs are clipped to +-UNIT_BOUND"""

# =======================
# Evaluation
# =======================

CI95_Z: Final[float] = 1.96

# =======================
# CSV schemas
# =======================

RESULT_COLUMNS: Final[tuple[str, ...]] = ("variant", "shots", "seed", "accuracy", "ci95")
TRAIN_LOG_COLUMNS: Final[tuple[str, ...]] = (
    "episode",
    "loss",
    "omega",
    "loss_total",
    "accuracy",
)
EVAL_LOG_COLUMNS: Final[tuple[str, ...]] = ("episode", "accuracy")

ABLATION_VARIANTS: Final[tuple[str, ...]] = (
    "w/o Sal. Seg.",
    "w/o Hal.",
    "Intra.-Hal.",
    "Intra.-Hal.+TriR",
    "Inter.-Hal.",
    "Inter.-Hal.+TriR",
    "Inter.-Hal.+TriR+HSP",
    "Inter.-Hal.+TriR+SSP",
)


class ExitCode(IntEnum):
    """CLI process exit codes."""

    OK = 0
    FAILURE = 1
    CONFIG = 2
    DATA = 3
    DIVERGENCE = 4
