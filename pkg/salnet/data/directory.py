"""
Directory ingestion and export.

Layout::

    <root>/<class_name>/<image>.ppm
    <root>/<class_name>/<image>.mask.pgm   (optional)

Classes are the sorted sub-directories; images within a class are sorted by
file name. Class ids follow that order.
"""

from dataclasses import replace
from pathlib import Path
from typing import List, Optional

import numpy as np
from scipy import ndimage

from salnet.data.dataset import Dataset, ImageSource, LabeledImage
from salnet.data.netpbm import read_pgm, read_ppm, write_pgm, write_ppm
from salnet.shared.exceptions import EmptyClassError, UnreadableFileError
from salnet.shared.logger import get_logger

logger = get_logger(__name__)

MASK_SUFFIX = ".mask.pgm"


def resize_plane(plane: np.ndarray, size: int) -> np.ndarray:
    """Bilinear resize of an (H, W) plane to (size, size), clamped to [0, 1]."""
    if plane.shape == (size, size):
        return np.clip(plane, 0.0, 1.0)
    factors = (size / plane.shape[0], size / plane.shape[1])
    resized = ndimage.zoom(plane, factors, order=1, mode="nearest", grid_mode=True)
    return np.clip(resized[:size, :size], 0.0, 1.0)


def resize_image(image: np.ndarray, size: int) -> np.ndarray:
    return np.stack([resize_plane(channel, size) for channel in image])


def resize_dataset(dataset: Dataset, size: int) -> Dataset:
    """Copy of ``dataset`` with every image and stored mask resampled to ``size``."""
    if size == dataset.image_size:
        return dataset
    images = [
        replace(
            item,
            image=resize_image(item.image, size),
            oracle_mask=None if item.oracle_mask is None else resize_plane(item.oracle_mask, size),
        )
        for item in dataset.images
    ]
    return Dataset(tuple(images), dataset.class_names, size, dict(dataset.metadata))


def _mask_path(image_path: Path) -> Path:
    return image_path.with_name(image_path.stem + MASK_SUFFIX)


def load_directory(path: Path, image_size: int) -> Dataset:
    """
    Load a class-per-directory PPM corpus.

    Raises:
        UnreadableFileError: the root is missing or an image/mask fails to parse
        EmptyClassError: a class directory holds no ``.ppm`` file, or there are no classes
    """
    root = Path(path)
    if not root.is_dir():
        raise UnreadableFileError("Data directory not found", path=str(root))

    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise EmptyClassError("No class directories found", details={"path": str(root)})

    images: List[LabeledImage] = []
    for class_id, class_dir in enumerate(class_dirs):
        files = sorted(class_dir.glob("*.ppm"))
        if not files:
            raise EmptyClassError("Class directory has no images", details={"class": class_dir.name})
        for file in files:
            image = resize_image(read_ppm(file), image_size)
            mask_file = _mask_path(file)
            mask: Optional[np.ndarray] = None
            if mask_file.exists():
                mask = resize_plane(read_pgm(mask_file), image_size)
            images.append(
                LabeledImage(
                    image=image,
                    class_id=class_id,
                    oracle_mask=mask,
                    source=ImageSource.FILE,
                    name=f"{class_dir.name}/{file.stem}",
                )
            )

    logger.info("Directory corpus loaded", path=str(root), classes=len(class_dirs), images=len(images))
    return Dataset(
        images=tuple(images),
        class_names=tuple(d.name for d in class_dirs),
        image_size=image_size,
        metadata={"source": "file", "path": str(root)},
    )


def export_directory(dataset: Dataset, path: Path) -> Path:
    """Write a dataset in the layout ``load_directory`` reads back."""
    root = Path(path)
    counters = [0] * dataset.num_classes
    for item in dataset.images:
        class_dir = root / dataset.class_names[item.class_id]
        class_dir.mkdir(parents=True, exist_ok=True)
        stem = f"img_{counters[item.class_id]:04d}"
        counters[item.class_id] += 1
        write_ppm(class_dir / f"{stem}.ppm", item.image)
        if item.oracle_mask is not None:
            write_pgm(class_dir / f"{stem}{MASK_SUFFIX}", item.oracle_mask)
    logger.info("Corpus exported", path=str(root), images=len(dataset))
    return root
