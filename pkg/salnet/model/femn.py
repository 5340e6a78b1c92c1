"""
Foreground-background encoding and mixing.

``f`` encodes foregrounds and backgrounds with one shared parameter set, the
two codes are summed (``mix``), refined by ``g`` and pooled into a
second-order descriptor ``R = psi(Phi Phi^T)``.

Feature maps travel as batched ``DiffValue`` arrays of shape (B, C, Z, Z);
descriptors as (B, K', K').
"""

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from salnet.autodiff.graph import DiffGraph
from salnet.autodiff.value import DiffValue
from salnet.config.constants import UNIT_BOUND
from salnet.model.layers import (
    LayerSpec,
    default_f_layers,
    default_g_layers,
    parse_layers,
    run_conv_stack,
    stack_output_size,
)
from salnet.shared.exceptions import ParameterRangeError, ShapeMismatchError


class EncoderConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    f_layers: List[LayerSpec] = Field(default_factory=default_f_layers, min_length=1)
    g_layers: List[LayerSpec] = Field(default_factory=default_g_layers, min_length=1)
    sigma_pn: float = Field(default=1.0, gt=0.0)

    @field_validator("f_layers", "g_layers", mode="before")
    @classmethod
    def _parse_layers(cls, value: object) -> object:
        return parse_layers(value)

    @property
    def k(self) -> int:
        return self.f_layers[-1].out_channels

    @property
    def k_prime(self) -> int:
        return self.g_layers[-1].out_channels

    def z(self, image_size: int) -> int:
        return stack_output_size(image_size, self.f_layers)

    def z_prime(self, image_size: int) -> int:
        return stack_output_size(self.z(image_size), self.g_layers)

    def check(self, image_size: int) -> None:
        """
        Raises:
            ParameterRangeError: the stack leaves fewer than 2x2 locations for pooling
        """
        if self.z_prime(image_size) < 2:
            raise ParameterRangeError(
                "Encoder leaves Z' < 2 at this image size",
                details={"image_size": image_size, "z": self.z(image_size), "z_prime": self.z_prime(image_size)},
            )


def encode_f(graph: DiffGraph, images: DiffValue, config: EncoderConfig) -> DiffValue:
    """(B, 3, M, M) -> (B, K, Z, Z)."""
    if images.data.ndim != 4 or images.shape[1] != 3:
        raise ShapeMismatchError("encode_f expects (B, 3, M, M)", node="f", details={"input": images.shape})
    return run_conv_stack(graph, images, "f", config.f_layers)


def mix(graph: DiffGraph, f_foreground: DiffValue, f_background: DiffValue) -> DiffValue:
    if f_foreground.shape != f_background.shape:
        raise ShapeMismatchError(
            "mix operands differ in shape",
            node="mix",
            details={"foreground": f_foreground.shape, "background": f_background.shape},
        )
    return graph.add(f_foreground, f_background, name="mix")


def encode_g(graph: DiffGraph, mixed: DiffValue, config: EncoderConfig) -> DiffValue:
    """(B, K, Z, Z) -> (B, K', Z', Z')."""
    if mixed.data.ndim != 4 or mixed.shape[1] != config.k:
        raise ShapeMismatchError(
            "encode_g expects (B, K, Z, Z)", node="g", details={"input": mixed.shape, "k": config.k}
        )
    return run_conv_stack(graph, mixed, "g", config.g_layers)


def psi(x: np.ndarray, sigma: float) -> np.ndarray:
    """
    Sigmoid power normalization ``(1 - e^{-sx}) / (1 + e^{-sx})``, evaluated on |x| and sign-restored.

    Clipped to the open interval (-1, 1).
    """
    x = np.asarray(x, dtype=np.float64)
    e = np.exp(-sigma * np.abs(x))
    return np.clip(np.sign(x) * (1.0 - e) / (1.0 + e), -UNIT_BOUND, UNIT_BOUND)


def sigmoid_pn(graph: DiffGraph, x: DiffValue, sigma: float) -> DiffValue:
    """Graph form of ``psi``: the rational form equals ``tanh(sigma * x / 2)``."""
    if sigma <= 0:
        raise ParameterRangeError("sigma_pn must be > 0", details={"sigma": sigma})
    return graph.tanh(graph.scale(x, sigma / 2.0), name="psi")


def second_order(graph: DiffGraph, phi: DiffValue, sigma: float) -> DiffValue:
    """(B, K', Z', Z') -> (B, K', K') with ``R = psi(Phi Phi^T)``, exactly symmetric."""
    flat = graph.flatten(phi, start_axis=2)
    return sigmoid_pn(graph, graph.outer(flat, name="gram"), sigma)
