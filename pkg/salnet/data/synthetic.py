"""
Synthetic few-shot corpus.

Class ``n`` is the n-th foreground shape family. Each image draws a random
pose, scale and colour for that shape and composites it through its alpha
matte onto a background whose texture family and colours are independent of
the class. Every image has its own generator seeded by
``(seed, class_id, index)``, so corpora are bit-identical for equal configs.
"""

from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, ValidationError, model_validator

from salnet.config.constants import ALPHA_THRESHOLD, FG_AREA_BOUNDS, SUPERSAMPLE
from salnet.data.dataset import Dataset, ImageSource, LabeledImage
from salnet.data.shapes import SHAPES, render_alpha
from salnet.data.textures import TEXTURES, render_background
from salnet.shared.exceptions import ParameterRangeError
from salnet.shared.logger import get_logger

logger = get_logger(__name__)

MAX_ROTATION = np.deg2rad(20.0)
MAX_POSE_ATTEMPTS = 60


class SyntheticConfig(BaseModel):
    num_classes: int = Field(default=20, ge=2)
    images_per_class: int = Field(default=20, ge=1)
    image_size: int = Field(default=32, ge=16)
    fg_shape_families: Optional[List[str]] = None
    bg_texture_families: Optional[List[str]] = None
    area_bounds: Tuple[float, float] = FG_AREA_BOUNDS
    seed: int = 0

    @model_validator(mode="after")
    def _check_families(self) -> "SyntheticConfig":
        shapes = self.fg_shape_families or list(SHAPES)
        unknown = [name for name in shapes if name not in SHAPES]
        if unknown:
            raise ValueError(f"unknown shape families: {unknown}")
        if len(shapes) < self.num_classes:
            raise ValueError(f"{self.num_classes} classes need as many shape families, have {len(shapes)}")
        textures = self.bg_texture_families or list(TEXTURES)
        unknown = [name for name in textures if name not in TEXTURES]
        if unknown:
            raise ValueError(f"unknown texture families: {unknown}")
        low, high = self.area_bounds
        if not 0.0 < low < high < 1.0:
            raise ValueError("area_bounds must satisfy 0 < low < high < 1")
        return self

    @property
    def shapes(self) -> List[str]:
        return (self.fg_shape_families or list(SHAPES))[: self.num_classes]

    @property
    def textures(self) -> List[str]:
        return self.bg_texture_families or list(TEXTURES)


def synthetic_config(**kwargs) -> SyntheticConfig:
    """Build a ``SyntheticConfig``, reporting violations as a range error."""
    try:
        return SyntheticConfig(**kwargs)
    except ValidationError as e:
        raise ParameterRangeError(
            "Invalid synthetic corpus configuration",
            details={"errors": [err["msg"] for err in e.errors()]},
            original_error=e,
        ) from e


def _foreground_area(alpha: np.ndarray) -> float:
    return float(np.mean(alpha >= ALPHA_THRESHOLD))


def _place_shape(family: str, size: int, rng: np.random.Generator, bounds: Tuple[float, float]) -> np.ndarray:
    """Sample a pose and grow/shrink the scale until the area is in bounds."""
    low, high = bounds
    center = tuple(rng.uniform(0.35 * size, 0.65 * size, size=2))
    rotation = rng.uniform(-MAX_ROTATION, MAX_ROTATION)
    radius = rng.uniform(0.2, 0.4) * size
    alpha = render_alpha(family, size, center, radius, rotation, SUPERSAMPLE)
    for _ in range(MAX_POSE_ATTEMPTS):
        area = _foreground_area(alpha)
        if low <= area <= high:
            return alpha
        radius *= 1.08 if area < low else 0.93
        alpha = render_alpha(family, size, center, radius, rotation, SUPERSAMPLE)
    raise ParameterRangeError(
        "Could not place shape within area bounds",
        details={"family": family, "size": size, "bounds": bounds},
    )


def render_image(
    family: str,
    texture: str,
    size: int,
    rng: np.random.Generator,
    bounds: Tuple[float, float] = FG_AREA_BOUNDS,
) -> Tuple[np.ndarray, np.ndarray]:
    """Return ``(image, matte)`` for one composited sample."""
    alpha = _place_shape(family, size, rng, bounds)
    background = render_background(texture, rng, size)
    color = rng.uniform(0.0, 1.0, size=3)
    shade = np.linspace(0.85, 1.0, size)[None, :, None] * np.ones((1, 1, size))
    foreground = np.clip(color[:, None, None] * shade, 0.0, 1.0)
    image = alpha[None] * foreground + (1.0 - alpha[None]) * background
    return image, alpha


def generate_synthetic(config: SyntheticConfig) -> Dataset:
    """
    Generate ``num_classes * images_per_class`` composited images.

    Oracle masks are the exact alpha mattes.
    """
    textures = config.textures
    images: List[LabeledImage] = []
    for class_id, family in enumerate(config.shapes):
        for index in range(config.images_per_class):
            rng = np.random.default_rng([config.seed, class_id, index])
            texture = textures[int(rng.integers(len(textures)))]
            image, alpha = render_image(family, texture, config.image_size, rng, config.area_bounds)
            images.append(
                LabeledImage(
                    image=image,
                    class_id=class_id,
                    oracle_mask=alpha,
                    source=ImageSource.SYNTHETIC,
                    name=f"{family}/{index:04d}",
                )
            )
    class_names = tuple(f"{i:02d}_{family}" for i, family in enumerate(config.shapes))
    logger.info(
        "Synthetic corpus generated",
        classes=config.num_classes,
        per_class=config.images_per_class,
        size=config.image_size,
        seed=config.seed,
    )
    return Dataset(
        images=tuple(images),
        class_names=class_names,
        image_size=config.image_size,
        metadata={"source": "synthetic", "seed": str(config.seed)},
    )
