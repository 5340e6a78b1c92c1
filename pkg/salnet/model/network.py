"""
Parameter container for the encoder (``f.*``, ``g.*``) and relation head (``r.*``).
"""

from pathlib import Path
from typing import Dict, Mapping

import numpy as np

from salnet.autodiff.checkpoint import assign_checkpoint, load_checkpoint, save_checkpoint
from salnet.autodiff.value import DiffValue
from salnet.model.femn import EncoderConfig
from salnet.model.layers import init_conv_stack
from salnet.model.relation import RelationConfig, init_relation


class SalNet:
    """
    Holds every trainable parameter of one model.

    Args:
        encoder: Encoder architecture
        relation: Relation head sizes
        seed: Initialization seed
    """

    def __init__(self, encoder: EncoderConfig, relation: RelationConfig, seed: int = 0):
        self.encoder = encoder
        self.relation = relation
        rng = np.random.default_rng([seed, 0])
        params: Dict[str, DiffValue] = {}
        params.update(init_conv_stack("f", 3, encoder.f_layers, rng))
        params.update(init_conv_stack("g", encoder.k, encoder.g_layers, rng))
        params.update(init_relation(relation, encoder.k_prime, rng))
        self.parameters = params

    def __len__(self) -> int:
        return len(self.parameters)

    def arrays(self) -> Dict[str, np.ndarray]:
        """Copy of the current parameter values."""
        return {name: value.data.copy() for name, value in self.parameters.items()}

    def snapshot(self) -> Dict[str, DiffValue]:
        """Detached copies, safe to share read-only across evaluation threads."""
        return {name: DiffValue(value.data, name=name) for name, value in self.parameters.items()}

    def assign(self, arrays: Mapping[str, np.ndarray]) -> None:
        assign_checkpoint(self.parameters, arrays)

    def save(self, path: Path) -> Path:
        return save_checkpoint(path, self.parameters)

    def load(self, path: Path) -> "SalNet":
        self.assign(load_checkpoint(path))
        return self

    def quantize(self) -> None:
        """Round parameters to float32 so memory matches what a checkpoint stores."""
        for value in self.parameters.values():
            value.data = value.data.astype(np.float32).astype(np.float64)
