"""
N-way W-shot episode sampling.
"""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from salnet.data.dataset import Dataset
from salnet.shared.exceptions import InsufficientDataError, ParameterRangeError


@dataclass(frozen=True)
class SupportEntry:
    image_index: int
    class_slot: int
    shot_slot: int


@dataclass(frozen=True)
class QueryEntry:
    image_index: int
    class_slot: int


@dataclass(frozen=True)
class Episode:
    """
    One episode. ``classes[n]`` is the dataset class id behind class slot ``n``.

    Supports are ordered class-major (slot ``n * W + w``), queries likewise.
    """

    n_way: int
    w_shot: int
    q_per_class: int
    classes: Tuple[int, ...]
    support: Tuple[SupportEntry, ...]
    queries: Tuple[QueryEntry, ...]

    @property
    def support_slots(self) -> np.ndarray:
        return np.array([s.class_slot for s in self.support], dtype=np.int64)

    @property
    def query_slots(self) -> np.ndarray:
        return np.array([q.class_slot for q in self.queries], dtype=np.int64)


def sample_episode(dataset: Dataset, n_way: int, w_shot: int, q_per_class: int, rng: np.random.Generator) -> Episode:
    """
    Draw N classes uniformly without replacement, then W+Q images per class.

    Raises:
        ParameterRangeError: N, W < 1 or Q < 0
        InsufficientDataError: too few classes, or a class with fewer than W+Q images
    """
    if n_way < 1 or w_shot < 1 or q_per_class < 0:
        raise ParameterRangeError(
            "Episode sizes out of range", details={"n_way": n_way, "w_shot": w_shot, "q": q_per_class}
        )
    needed = w_shot + q_per_class
    by_class = dataset.indices_by_class
    for class_id, indices in enumerate(by_class):
        if len(indices) < needed:
            raise InsufficientDataError(
                f"Class '{dataset.class_names[class_id]}' has {len(indices)} images, episode needs {needed}",
                details={"class": dataset.class_names[class_id], "available": len(indices), "needed": needed},
            )
    if dataset.num_classes < n_way:
        raise InsufficientDataError(
            f"Dataset has {dataset.num_classes} classes, episode needs {n_way}",
            details={"available": dataset.num_classes, "needed": n_way},
        )

    classes = tuple(int(c) for c in rng.choice(dataset.num_classes, size=n_way, replace=False))
    support: List[SupportEntry] = []
    queries: List[QueryEntry] = []
    for slot, class_id in enumerate(classes):
        pool = np.asarray(by_class[class_id], dtype=np.int64)
        chosen = rng.permutation(pool)[:needed]
        support.extend(SupportEntry(int(idx), slot, w) for w, idx in enumerate(chosen[:w_shot]))
        queries.extend(QueryEntry(int(idx), slot) for idx in chosen[w_shot:])
    return Episode(
        n_way=n_way,
        w_shot=w_shot,
        q_per_class=q_per_class,
        classes=classes,
        support=tuple(support),
        queries=tuple(queries),
    )
