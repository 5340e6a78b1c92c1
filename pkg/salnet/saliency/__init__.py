"""Saliency backends, foreground/background split and dilation."""

from salnet.saliency.masks import (
    Provenance,
    SaliencyBackend,
    SaliencyMask,
    background,
    compute_mask,
    dilate,
    file_mask,
    heuristic_mask,
    oracle_mask,
    scaled_radius,
    split,
)

__all__ = [
    "Provenance",
    "SaliencyBackend",
    "SaliencyMask",
    "oracle_mask",
    "file_mask",
    "heuristic_mask",
    "compute_mask",
    "split",
    "background",
    "dilate",
    "scaled_radius",
]
