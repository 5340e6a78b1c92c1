"""
Labeled image corpus.

A ``Dataset`` is immutable after construction and safe for concurrent reads.
Class splits are disjoint by class id and re-index the kept classes to
``0..n-1`` in their original order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from salnet.shared.exceptions import DataError, ParameterRangeError


class ImageSource(str, Enum):
    SYNTHETIC = "synthetic"
    FILE = "file"


@dataclass(frozen=True, eq=False)
class LabeledImage:
    """One image with its class and, optionally, a ground-truth matte."""

    image: np.ndarray  # (3, M, M) in [0, 1]
    class_id: int
    oracle_mask: Optional[np.ndarray] = None  # (M, M) in [0, 1]
    source: ImageSource = ImageSource.SYNTHETIC
    name: str = ""

    def __post_init__(self) -> None:
        if self.image.ndim != 3 or self.image.shape[0] != 3 or self.image.shape[1] != self.image.shape[2]:
            raise DataError("Image must be 3 x M x M", details={"shape": self.image.shape, "name": self.name})
        if self.oracle_mask is not None:
            if self.oracle_mask.shape != self.image.shape[1:]:
                raise DataError(
                    "Mask shape differs from image",
                    details={"mask": self.oracle_mask.shape, "image": self.image.shape, "name": self.name},
                )
            if self.oracle_mask.min() < 0.0 or self.oracle_mask.max() > 1.0:
                raise DataError("Mask values outside [0, 1]", details={"name": self.name})

    @property
    def size(self) -> int:
        return int(self.image.shape[1])


@dataclass(frozen=True, eq=False)
class Dataset:
    images: Tuple[LabeledImage, ...]
    class_names: Tuple[str, ...]
    image_size: int
    metadata: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for item in self.images:
            if not 0 <= item.class_id < len(self.class_names):
                raise DataError(
                    "class_id outside [0, num_classes)",
                    details={"class_id": item.class_id, "num_classes": len(self.class_names), "name": item.name},
                )
            if item.size != self.image_size:
                raise DataError(
                    "Image size differs from dataset size",
                    details={"expected": self.image_size, "found": item.size, "name": item.name},
                )

    def __len__(self) -> int:
        return len(self.images)

    def __getitem__(self, index: int) -> LabeledImage:
        return self.images[index]

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @cached_property
    def indices_by_class(self) -> Tuple[Tuple[int, ...], ...]:
        buckets: List[List[int]] = [[] for _ in self.class_names]
        for index, item in enumerate(self.images):
            buckets[item.class_id].append(index)
        return tuple(tuple(b) for b in buckets)

    def subset_classes(self, class_ids: Sequence[int]) -> Dataset:
        """Keep the given classes, re-indexed in the given order."""
        remap = {old: new for new, old in enumerate(class_ids)}
        kept = tuple(
            LabeledImage(
                image=item.image,
                class_id=remap[item.class_id],
                oracle_mask=item.oracle_mask,
                source=item.source,
                name=item.name,
            )
            for item in self.images
            if item.class_id in remap
        )
        return Dataset(
            images=kept,
            class_names=tuple(self.class_names[c] for c in class_ids),
            image_size=self.image_size,
            metadata=dict(self.metadata),
        )

    def split(self, ratios: Sequence[float] = (0.6, 0.15, 0.25)) -> Dict[str, Dataset]:
        """
        Partition classes into disjoint train/val/test datasets.

        Train and val counts are floored; test takes the remainder. A split
        with a positive ratio always receives at least one class.

        Raises:
            ParameterRangeError: ratios are not three non-negative values summing to 1,
                or there are too few classes to honour them
        """
        if len(ratios) != 3 or min(ratios) < 0 or not np.isclose(sum(ratios), 1.0):
            raise ParameterRangeError("Split ratios must be three non-negative values summing to 1",
                                      details={"ratios": list(ratios)})
        n = self.num_classes
        n_train = int(np.floor(ratios[0] * n + 1e-9))
        n_val = int(np.floor(ratios[1] * n + 1e-9))
        if ratios[0] > 0:
            n_train = max(n_train, 1)
        if ratios[1] > 0:
            n_val = max(n_val, 1)
        n_test = n - n_train - n_val
        if n_test < (1 if ratios[2] > 0 else 0):
            raise ParameterRangeError(
                "Too few classes for the requested split",
                details={"num_classes": n, "ratios": list(ratios)},
            )
        order = list(range(n))
        return {
            "train": self.subset_classes(order[:n_train]),
            "val": self.subset_classes(order[n_train : n_train + n_val]),
            "test": self.subset_classes(order[n_train + n_val :]),
        }
