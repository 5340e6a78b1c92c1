"""Encoder/mixer, hallucination and relation head."""

from salnet.model.femn import (
    EncoderConfig,
    encode_f,
    encode_g,
    mix,
    psi,
    second_order,
    sigmoid_pn,
)
from salnet.model.hallucination import (
    HallucinatedSample,
    HallucinationPair,
    PriorConfig,
    PriorMode,
    Strategy,
    TrirConfig,
    TrirMode,
    apply_hsp,
    apply_ssp,
    background_distance,
    enumerate_inter,
    enumerate_intra,
    enumerate_pairs,
    prior_probability,
    trir_omega,
)
from salnet.model.layers import LayerSpec
from salnet.model.network import SalNet
from salnet.model.relation import RelationConfig, classify, episode_loss, relate

__all__ = [
    "EncoderConfig",
    "LayerSpec",
    "encode_f",
    "encode_g",
    "mix",
    "psi",
    "sigmoid_pn",
    "second_order",
    "Strategy",
    "PriorMode",
    "TrirMode",
    "PriorConfig",
    "TrirConfig",
    "HallucinationPair",
    "HallucinatedSample",
    "enumerate_intra",
    "enumerate_inter",
    "enumerate_pairs",
    "background_distance",
    "prior_probability",
    "apply_ssp",
    "apply_hsp",
    "trir_omega",
    "RelationConfig",
    "relate",
    "episode_loss",
    "classify",
    "SalNet",
]
