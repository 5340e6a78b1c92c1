"""
Background texture families.

A texture is a scalar pattern ``t`` in [0, 1] over the image grid; the colour
image is the blend of two random colours by ``t``. Families and colours are
drawn independently of the foreground class.
"""

from typing import Callable, Dict

import numpy as np
from scipy import ndimage

PatternFn = Callable[[np.random.Generator, int], np.ndarray]

TEXTURES: Dict[str, PatternFn] = {}


def texture(name: str) -> Callable[[PatternFn], PatternFn]:
    def decorator(func: PatternFn) -> PatternFn:
        TEXTURES[name] = func
        return func

    return decorator


def _grid(size: int) -> tuple[np.ndarray, np.ndarray]:
    coords = np.arange(size, dtype=np.float64)
    return np.meshgrid(coords, coords, indexing="ij")


@texture("stripes")
def _stripes(rng: np.random.Generator, size: int) -> np.ndarray:
    rows, cols = _grid(size)
    angle = rng.uniform(0.0, np.pi)
    period = rng.uniform(3.0, 8.0) * size / 32.0
    phase = rng.uniform(0.0, 2.0 * np.pi)
    proj = rows * np.sin(angle) + cols * np.cos(angle)
    return 0.5 + 0.5 * np.sin(2.0 * np.pi * proj / period + phase)


@texture("checker")
def _checker(rng: np.random.Generator, size: int) -> np.ndarray:
    rows, cols = _grid(size)
    cell = max(2, int(rng.integers(3, 7) * size / 32))
    offset = rng.integers(0, cell, size=2)
    return (((rows + offset[0]) // cell + (cols + offset[1]) // cell) % 2).astype(np.float64)


@texture("gradient")
def _gradient(rng: np.random.Generator, size: int) -> np.ndarray:
    rows, cols = _grid(size)
    angle = rng.uniform(0.0, 2.0 * np.pi)
    proj = rows * np.sin(angle) + cols * np.cos(angle)
    return (proj - proj.min()) / max(np.ptp(proj), 1e-12)


@texture("noise")
def _noise(rng: np.random.Generator, size: int) -> np.ndarray:
    coarse = rng.uniform(0.0, 1.0, size=(5, 5))
    smooth = ndimage.zoom(coarse, size / 5.0, order=3, mode="nearest")[:size, :size]
    return np.clip(smooth, 0.0, 1.0)


@texture("dots")
def _dots(rng: np.random.Generator, size: int) -> np.ndarray:
    rows, cols = _grid(size)
    spacing = rng.uniform(4.0, 8.0) * size / 32.0
    radius = spacing * rng.uniform(0.15, 0.3)
    dy = (rows + rng.uniform(0, spacing)) % spacing - spacing / 2.0
    dx = (cols + rng.uniform(0, spacing)) % spacing - spacing / 2.0
    return (dx * dx + dy * dy <= radius * radius).astype(np.float64)


@texture("plaid")
def _plaid(rng: np.random.Generator, size: int) -> np.ndarray:
    rows, cols = _grid(size)
    p1, p2 = rng.uniform(4.0, 10.0, size=2) * size / 32.0
    return 0.25 * (2.0 + np.sin(2.0 * np.pi * rows / p1) + np.sin(2.0 * np.pi * cols / p2))


def render_background(family: str, rng: np.random.Generator, size: int) -> np.ndarray:
    """Return a (3, size, size) background image in [0, 1]."""
    pattern = TEXTURES[family](rng, size)
    color_a = rng.uniform(0.0, 1.0, size=3)
    color_b = rng.uniform(0.0, 1.0, size=3)
    image = color_a[:, None, None] * (1.0 - pattern[None]) + color_b[:, None, None] * pattern[None]
    return np.clip(image, 0.0, 1.0)
