"""
Saliency masks, foreground/background split and mask dilation.

Three backends produce a relevance map ``h(I)`` in [0, 1]: the generator's
alpha matte (``oracle``), a border-contrast heuristic (``heuristic``) and masks
read from disk (``file``). Dilated masks only ever shape backgrounds.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from salnet.config.constants import (
    DILATION_TRUNCATE,
    HEURISTIC_MIN_SIZE,
    REFERENCE_IMAGE_SIZE,
)
from salnet.data.dataset import LabeledImage
from salnet.shared.exceptions import MissingOracleError, ParameterRangeError, ShapeMismatchError
from salnet.shared.logger import get_logger

logger = get_logger(__name__)


class Provenance(str, Enum):
    ORACLE = "oracle"
    HEURISTIC = "heuristic"
    FILE = "file"
    DILATED = "dilated"


class SaliencyBackend(str, Enum):
    ORACLE = "oracle"
    HEURISTIC = "heuristic"
    FILE = "file"


@dataclass(frozen=True, eq=False)
class SaliencyMask:
    values: np.ndarray  # (M, M) in [0, 1]
    provenance: Provenance
    radius: Optional[float] = None
    degenerate: bool = False

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape


def oracle_mask(item: LabeledImage) -> SaliencyMask:
    """Return the stored matte unchanged."""
    if item.oracle_mask is None:
        raise MissingOracleError("Image has no stored matte", details={"image": item.name})
    return SaliencyMask(values=item.oracle_mask, provenance=Provenance.ORACLE)


def file_mask(item: LabeledImage) -> SaliencyMask:
    if item.oracle_mask is None:
        raise MissingOracleError("Image has no mask file", details={"image": item.name})
    return SaliencyMask(values=item.oracle_mask, provenance=Provenance.FILE)


def heuristic_mask(image: np.ndarray) -> SaliencyMask:
    """
    Border-prior contrast map.

    Each pixel scores its colour distance to the mean colour of the 1-pixel
    border frame; scores are box-smoothed 3x3 and min-max normalized. A
    constant image yields an all-zero mask flagged ``degenerate``.
    """
    size = image.shape[-1]
    if image.shape[-2] < HEURISTIC_MIN_SIZE or size < HEURISTIC_MIN_SIZE:
        raise ParameterRangeError(
            "Heuristic saliency needs images of at least 8x8", details={"shape": image.shape}
        )
    border = np.concatenate([image[:, 0, :], image[:, -1, :], image[:, 1:-1, 0], image[:, 1:-1, -1]], axis=1)
    reference = border.mean(axis=1)
    contrast = np.sqrt(np.sum((image - reference[:, None, None]) ** 2, axis=0))
    smoothed = ndimage.uniform_filter(contrast, size=3, mode="nearest")
    low, span = smoothed.min(), np.ptp(smoothed)
    if span <= 1e-12:
        logger.warning("Degenerate image for heuristic saliency", shape=tuple(image.shape))
        return SaliencyMask(values=np.zeros_like(contrast), provenance=Provenance.HEURISTIC, degenerate=True)
    return SaliencyMask(values=np.clip((smoothed - low) / span, 0.0, 1.0), provenance=Provenance.HEURISTIC)


def compute_mask(item: LabeledImage, backend: SaliencyBackend) -> SaliencyMask:
    backend = SaliencyBackend(backend)
    if backend is SaliencyBackend.ORACLE:
        return oracle_mask(item)
    if backend is SaliencyBackend.FILE:
        return file_mask(item)
    return heuristic_mask(item.image)


def _check_shapes(image: np.ndarray, mask: np.ndarray) -> None:
    if image.shape[1:] != mask.shape:
        raise ShapeMismatchError(
            "Mask shape differs from image", node="split", details={"image": image.shape, "mask": mask.shape}
        )


def split(image: np.ndarray, mask: SaliencyMask) -> Tuple[np.ndarray, np.ndarray]:
    """
    Decompose an image into ``F = h*I`` and ``B = (1-h)*I``.

    ``F`` is re-derived as ``I - B`` so that ``F + B == I`` holds bit-exactly
    (Sterbenz); it differs from ``h*I`` by at most one ulp.
    """
    _check_shapes(image, mask.values)
    h = mask.values[None]
    background = image - h * image
    foreground = image - background
    return foreground, background


def background(image: np.ndarray, mask: SaliencyMask) -> np.ndarray:
    """``(1-h)*I`` for an already dilated (or raw) mask."""
    _check_shapes(image, mask.values)
    return image - mask.values[None] * image


def scaled_radius(radius: float, image_size: int) -> float:
    """Radii are declared at the reference size and scale with ``M``."""
    return float(radius) * image_size / REFERENCE_IMAGE_SIZE


def gaussian_footprint(radius: float, truncate: float = DILATION_TRUNCATE) -> np.ndarray:
    """Peak-normalized Gaussian (centre weight 1) cut off at ``truncate * radius``."""
    half = int(np.floor(truncate * radius))
    offsets = np.arange(-half, half + 1, dtype=np.float64)
    d2 = offsets[:, None] ** 2 + offsets[None, :] ** 2
    kernel = np.exp(-d2 / (2.0 * radius * radius))
    kernel[d2 > (truncate * radius) ** 2] = 0.0
    return kernel


def dilate(mask: SaliencyMask, radius: float, threshold: float) -> SaliencyMask:
    """
    Blur the mask with a Gaussian of standard deviation ``radius`` and binarize.

    The kernel keeps a centre weight of 1 and the response is clipped to 1, so
    every pixel at or above ``threshold`` before blurring stays above it and
    the foreground set only grows with the radius.

    Raises:
        ParameterRangeError: radius < 0 or threshold outside (0, 1)
    """
    if radius < 0 or not np.isfinite(radius):
        raise ParameterRangeError("Dilation radius must be >= 0", details={"radius": radius})
    if not 0.0 < threshold < 1.0:
        raise ParameterRangeError("Dilation threshold must be in (0, 1)", details={"threshold": threshold})
    values = mask.values
    if radius > 0:
        blurred = ndimage.correlate(values, gaussian_footprint(radius), mode="constant", cval=0.0)
        values = np.minimum(blurred, 1.0)
    binary = (values >= threshold).astype(np.float64)
    return SaliencyMask(values=binary, provenance=Provenance.DILATED, radius=float(radius))
