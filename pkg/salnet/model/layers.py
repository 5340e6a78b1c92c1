"""
Convolutional block descriptions and parameter initialization.

A block is ``conv(k x k, stride, same padding) -> nonlinearity -> [2x2 max-pool]``.
Blocks serialize as ``out:kernel:stride:pool:nonlinearity`` tokens, e.g.
``32:3:1:1:relu``.
"""

from typing import Dict, List, Literal, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from salnet.autodiff.graph import DiffGraph
from salnet.autodiff.value import DiffValue

Nonlinearity = Literal["relu", "tanh", "none"]


class LayerSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    out_channels: int = Field(ge=1)
    kernel: int = Field(default=3, ge=1)
    stride: int = Field(default=1, ge=1)
    pool: bool = True
    nonlinearity: Nonlinearity = "relu"

    @field_validator("kernel")
    @classmethod
    def _odd_kernel(cls, value: int) -> int:
        if value % 2 == 0:
            raise ValueError("kernel must be odd for same padding")
        return value

    @classmethod
    def parse(cls, token: str) -> "LayerSpec":
        parts = token.strip().split(":")
        if len(parts) != 5:
            raise ValueError(f"layer '{token}' must be out:kernel:stride:pool:nonlinearity")
        out, kernel, stride, pool, nonlinearity = parts
        return cls(
            out_channels=int(out),
            kernel=int(kernel),
            stride=int(stride),
            pool=pool.strip().lower() in ("1", "true", "yes", "pool"),
            nonlinearity=nonlinearity.strip(),
        )

    def format(self) -> str:
        return f"{self.out_channels}:{self.kernel}:{self.stride}:{int(self.pool)}:{self.nonlinearity}"


def parse_layers(value: object) -> object:
    """Accept ``"32:3:1:1:relu,32:3:1:1:relu"`` as well as lists of specs/dicts."""
    if isinstance(value, str):
        return [LayerSpec.parse(token) for token in value.split(",") if token.strip()]
    return value


def format_layers(layers: Sequence[LayerSpec]) -> str:
    return ",".join(layer.format() for layer in layers)


def block_output_size(size: int, layer: LayerSpec) -> int:
    size = (size - 1) // layer.stride + 1
    return size // 2 if layer.pool else size


def stack_output_size(size: int, layers: Sequence[LayerSpec]) -> int:
    for layer in layers:
        size = block_output_size(size, layer)
    return size


def init_conv_stack(
    prefix: str, in_channels: int, layers: Sequence[LayerSpec], rng: np.random.Generator
) -> Dict[str, DiffValue]:
    """He-normal kernels, zero biases. Names: ``<prefix>.<i>.weight|bias``."""
    params: Dict[str, DiffValue] = {}
    channels = in_channels
    for i, layer in enumerate(layers):
        fan_in = channels * layer.kernel * layer.kernel
        weight = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(layer.out_channels, channels, layer.kernel, layer.kernel))
        params[f"{prefix}.{i}.weight"] = DiffValue(weight, name=f"{prefix}.{i}.weight")
        params[f"{prefix}.{i}.bias"] = DiffValue(np.zeros(layer.out_channels), name=f"{prefix}.{i}.bias")
        channels = layer.out_channels
    return params


def init_dense(name: str, fan_in: int, fan_out: int, rng: np.random.Generator) -> Dict[str, DiffValue]:
    weight = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
    return {
        f"{name}.weight": DiffValue(weight, name=f"{name}.weight"),
        f"{name}.bias": DiffValue(np.zeros(fan_out), name=f"{name}.bias"),
    }


def apply_nonlinearity(graph: DiffGraph, x: DiffValue, nonlinearity: str) -> DiffValue:
    if nonlinearity == "relu":
        return graph.relu(x)
    if nonlinearity == "tanh":
        return graph.tanh(x)
    return x


def run_conv_stack(graph: DiffGraph, x: DiffValue, prefix: str, layers: Sequence[LayerSpec]) -> DiffValue:
    """Apply ``<prefix>.*`` blocks to a (B, C, H, W) batch."""
    for i, layer in enumerate(layers):
        x = graph.conv2d(
            x,
            graph.param(f"{prefix}.{i}.weight"),
            graph.param(f"{prefix}.{i}.bias"),
            stride=layer.stride,
            name=f"{prefix}.{i}.conv",
        )
        x = apply_nonlinearity(graph, x, layer.nonlinearity)
        if layer.pool:
            x = graph.max_pool2x2(x, name=f"{prefix}.{i}.pool")
    return x


def default_f_layers() -> List[LayerSpec]:
    return [LayerSpec(out_channels=32), LayerSpec(out_channels=32)]


def default_g_layers() -> List[LayerSpec]:
    return [LayerSpec(out_channels=64), LayerSpec(out_channels=64, pool=False)]
