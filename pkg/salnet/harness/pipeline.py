"""
One episode through the full model.

Stages:
    1. ``prepare_episode`` builds masks, foreground/background splits and the
       dilated background variants of every support (numpy, no graph).
    2. ``encode_episode`` runs f, mixing, hallucination, priors and g on a
       graph and returns the stacked descriptors of supports (real, then
       hallucinated) and queries, plus Omega when TriR is on.
    3. ``relation_stage`` scores every (query, support) pair in chunks on
       separate graphs. Each chunk's descriptor adjoints are scattered back so
       a single ``backward_many`` on the encoder graph finishes the gradient.

Supports and queries are encoded in separate batches; a teacher replaying the
real-support path therefore sees batches of the same shape as the student.
"""

from dataclasses import dataclass, field
from typing import List, Mapping, Optional

import numpy as np

from salnet.autodiff.graph import DiffGraph
from salnet.autodiff.value import DiffValue
from salnet.config.run_config import Encoding, RunConfig
from salnet.data.dataset import Dataset
from salnet.data.episodes import Episode
from salnet.model.femn import EncoderConfig, encode_f, encode_g, mix, second_order
from salnet.model.hallucination import (
    HallucinatedSample,
    HallucinationPair,
    PriorMode,
    TrirMode,
    apply_hsp,
    apply_ssp,
    background_distance,
    check_reconstruction,
    enumerate_pairs,
    prior_probability,
    trir_omega,
)
from salnet.model.relation import classify, episode_loss, relate, relation_targets
from salnet.saliency.masks import background, compute_mask, dilate, scaled_radius, split
from salnet.shared.exceptions import DataError, EmptyEpisodeError
from salnet.shared.logger import StructuredLogger, get_logger

logger = get_logger(__name__)


@dataclass(eq=False)
class EpisodeInputs:
    """Numpy inputs of one episode; support rows first, in episode order."""

    images: np.ndarray
    foregrounds: Optional[np.ndarray]
    backgrounds: Optional[np.ndarray]
    variant_backgrounds: List[np.ndarray]
    variant_radii: List[Optional[float]]
    support_labels: np.ndarray
    query_labels: np.ndarray
    n_classes: int
    names: List[str] = field(default_factory=list)

    @property
    def n_support(self) -> int:
        return len(self.support_labels)


@dataclass(eq=False)
class EncodedEpisode:
    descriptors: DiffValue  # (S + H + Q, K', K')
    support_labels: np.ndarray  # real then hallucinated, length S + H
    query_labels: np.ndarray
    samples: List[HallucinatedSample]
    real_maps: DiffValue  # g-output of the real supports, pre-prior
    omega: Optional[DiffValue] = None

    @property
    def n_pool(self) -> int:
        return len(self.support_labels)


@dataclass(eq=False)
class RelationOutcome:
    scores: np.ndarray  # (Q, S + H), query-major
    loss: float
    descriptor_adjoint: Optional[np.ndarray] = None

    def predictions(self, support_labels: np.ndarray, n_classes: int) -> np.ndarray:
        return np.array([classify(row, support_labels, n_classes) for row in self.scores], dtype=np.int64)


def prepare_episode(dataset: Dataset, episode: Episode, config: RunConfig) -> EpisodeInputs:
    """
    Raises:
        DataError: the dataset image size differs from the configuration
        MissingOracleError: the backend needs a stored mask the image lacks
    """
    if dataset.image_size != config.image_size:
        raise DataError(
            "Dataset image size differs from run configuration",
            details={"dataset": dataset.image_size, "config": config.image_size},
        )
    items = [dataset[s.image_index] for s in episode.support] + [dataset[q.image_index] for q in episode.queries]
    images = np.stack([item.image for item in items])
    n_support = len(episode.support)
    inputs = EpisodeInputs(
        images=images,
        foregrounds=None,
        backgrounds=None,
        variant_backgrounds=[],
        variant_radii=[],
        support_labels=episode.support_slots,
        query_labels=episode.query_slots,
        n_classes=episode.n_way,
        names=[item.name for item in items],
    )
    if config.encoding is Encoding.WHOLE_IMAGE:
        return inputs

    masks = [compute_mask(item, config.saliency_backend) for item in items]
    parts = [split(item.image, mask) for item, mask in zip(items, masks)]
    inputs.foregrounds = np.stack([f for f, _ in parts])
    inputs.backgrounds = np.stack([b for _, b in parts])

    if not config.dilation_radii:
        inputs.variant_backgrounds = [inputs.backgrounds[:n_support]]
        inputs.variant_radii = [None]
        return inputs
    for radius in config.dilation_radii:
        pixels = scaled_radius(radius, config.image_size)
        inputs.variant_backgrounds.append(
            np.stack(
                [
                    background(item.image, dilate(mask, pixels, config.dilation_threshold))
                    for item, mask in zip(items[:n_support], masks[:n_support])
                ]
            )
        )
        inputs.variant_radii.append(float(radius))
    return inputs


def _one_hot(indices: np.ndarray, width: int) -> np.ndarray:
    selection = np.zeros((len(indices), width))
    selection[np.arange(len(indices)), indices] = 1.0
    return selection


def _gather_rows(graph: DiffGraph, maps: DiffValue, indices: np.ndarray) -> DiffValue:
    """Rows ``maps[indices]`` as a matmul with a constant one-hot matrix."""
    flat = graph.flatten(maps, start_axis=1)
    picked = graph.matmul(graph.constant(_one_hot(indices, maps.shape[0])), flat)
    return graph.reshape(picked, (len(indices),) + maps.shape[1:])


def _real_maps(graph: DiffGraph, encoder: EncoderConfig, foregrounds: np.ndarray, backgrounds: np.ndarray) -> DiffValue:
    mixed = mix(graph, encode_f(graph, graph.constant(foregrounds), encoder), encode_f(graph, graph.constant(backgrounds), encoder))
    return encode_g(graph, mixed, encoder)


def teacher_maps(
    teacher_parameters: Mapping[str, DiffValue],
    config: RunConfig,
    inputs: EpisodeInputs,
) -> np.ndarray:
    """
    Frozen teacher maps for the real supports.

    ``teacher_fgbg`` replays ``g*(f*(F) + f*(B))``; ``teacher_full_image``
    encodes the reconstructed image ``g*(f*(F + B))``.

    Raises:
        ConstraintViolationError: a support's F + B differs from its image
    """
    n = inputs.n_support
    foregrounds, backgrounds = inputs.foregrounds[:n], inputs.backgrounds[:n]
    for i in range(n):
        check_reconstruction(foregrounds[i], backgrounds[i], inputs.images[i], inputs.names[i] if inputs.names else "")
    graph = DiffGraph(teacher_parameters, record=False)
    if config.trir.mode is TrirMode.TEACHER_FULL_IMAGE:
        images = foregrounds + backgrounds
        maps = encode_g(graph, encode_f(graph, graph.constant(images), config.encoder), config.encoder)
    else:
        maps = _real_maps(graph, config.encoder, foregrounds, backgrounds)
    return maps.data


def _hallucinate(
    graph: DiffGraph,
    config: RunConfig,
    inputs: EpisodeInputs,
    f_foreground: DiffValue,
    pairs: List[HallucinationPair],
    episode_logger: Optional[StructuredLogger] = None,
) -> tuple[Optional[DiffValue], List[HallucinatedSample]]:
    """Encode hallucinated supports; returns their g-output (after priors) and the kept samples."""
    encoder = config.encoder
    variant_codes = [encode_f(graph, graph.constant(b), encoder) for b in inputs.variant_backgrounds]
    codes = variant_codes[0] if len(variant_codes) == 1 else graph.concatenate(variant_codes, axis=0)

    n = inputs.n_support
    labels = inputs.support_labels
    fg = np.array([p.fg_source for p in pairs], dtype=np.int64)
    bg = np.array([p.bg_source for p in pairs], dtype=np.int64)
    variant = np.array([p.variant for p in pairs], dtype=np.int64)
    bg_rows = variant * n + bg

    probabilities = np.ones(len(pairs))
    if config.prior.mode is not PriorMode.NONE:
        fg_rows = variant * n + fg
        distances = np.array([background_distance(codes.data[a], codes.data[b]) for a, b in zip(fg_rows, bg_rows)])
        probabilities = np.asarray(prior_probability(distances, config.prior.alpha), dtype=np.float64).reshape(-1)

    samples = [
        HallucinatedSample(
            fg_source=int(fg[i]),
            bg_source=int(bg[i]),
            bg_variant=int(variant[i]),
            bg_dilation_radius=inputs.variant_radii[variant[i]],
            class_label=int(labels[fg[i]]),
            prior_p=float(probabilities[i]),
        )
        for i in range(len(pairs))
    ]
    if config.prior.mode is PriorMode.HSP:
        kept = apply_hsp(samples, config.prior.tau)
        if not kept:
            (episode_logger or logger).warning("HSP removed every hallucinated support", pairs=len(samples), tau=config.prior.tau)
        samples = kept
    if not samples:
        return None, []

    fg_idx = np.array([s.fg_source for s in samples], dtype=np.int64)
    bg_idx = np.array([s.bg_variant * n + s.bg_source for s in samples], dtype=np.int64)
    mixed = mix(graph, _gather_rows(graph, f_foreground, fg_idx), _gather_rows(graph, codes, bg_idx))
    maps = encode_g(graph, mixed, encoder)
    if config.prior.mode is PriorMode.SSP:
        maps = apply_ssp(graph, maps, np.array([s.prior_p for s in samples]))
    return maps, samples


def encode_episode(
    graph: DiffGraph,
    config: RunConfig,
    inputs: EpisodeInputs,
    episode: Episode,
    teacher: Optional[np.ndarray] = None,
    episode_logger: Optional[StructuredLogger] = None,
) -> EncodedEpisode:
    """
    Build all descriptors of one episode on ``graph``.

    Args:
        teacher: Teacher maps of the real supports (see ``teacher_maps``); required
            to compute Omega
    """
    encoder = config.encoder
    sigma = encoder.sigma_pn
    n = inputs.n_support

    if config.encoding is Encoding.WHOLE_IMAGE:
        support_maps = encode_g(graph, encode_f(graph, graph.constant(inputs.images[:n]), encoder), encoder)
        query_maps = encode_g(graph, encode_f(graph, graph.constant(inputs.images[n:]), encoder), encoder)
        descriptors = graph.concatenate(
            [second_order(graph, support_maps, sigma), second_order(graph, query_maps, sigma)], axis=0, name="descriptors"
        )
        return EncodedEpisode(descriptors, inputs.support_labels, inputs.query_labels, [], support_maps)

    f_foreground = encode_f(graph, graph.constant(inputs.foregrounds[:n]), encoder)
    f_background = encode_f(graph, graph.constant(inputs.backgrounds[:n]), encoder)
    support_maps = encode_g(graph, mix(graph, f_foreground, f_background), encoder)
    query_maps = _real_maps(graph, encoder, inputs.foregrounds[n:], inputs.backgrounds[n:])

    groups = [second_order(graph, support_maps, sigma)]
    samples: List[HallucinatedSample] = []
    pairs = enumerate_pairs(config.strategy, episode, len(inputs.variant_backgrounds))
    if pairs:
        hallucinated_maps, samples = _hallucinate(graph, config, inputs, f_foreground, pairs, episode_logger)
        if hallucinated_maps is not None:
            groups.append(second_order(graph, hallucinated_maps, sigma))
    groups.append(second_order(graph, query_maps, sigma))
    descriptors = graph.concatenate(groups, axis=0, name="descriptors")

    pool_labels = np.concatenate(
        [inputs.support_labels, np.array([s.class_label for s in samples], dtype=np.int64)]
    )
    omega = trir_omega(graph, support_maps, teacher) if teacher is not None else None
    return EncodedEpisode(descriptors, pool_labels, inputs.query_labels, samples, support_maps, omega)


def relation_stage(
    parameters: Mapping[str, DiffValue],
    descriptors: np.ndarray,
    n_pool: int,
    targets: np.ndarray,
    pair_chunk: int,
    train: bool,
) -> RelationOutcome:
    """
    Score all (query, support) pairs, query-major, ``pair_chunk`` pairs per graph.

    When ``train`` is set, relation-head adjoints accumulate on ``parameters``
    and the descriptor adjoint of the loss is returned.

    Raises:
        EmptyEpisodeError: no pairs to score
    """
    n_query = descriptors.shape[0] - n_pool
    total = n_pool * n_query
    if total == 0:
        raise EmptyEpisodeError("Episode produced no query-support pairs", details={"pool": n_pool, "queries": n_query})
    flat_targets = targets.reshape(-1)
    scores = np.empty(total)
    adjoint = np.zeros_like(descriptors) if train else None
    loss = 0.0
    for start in range(0, total, pair_chunk):
        stop = min(start + pair_chunk, total)
        index = np.arange(start, stop)
        s_rows = index % n_pool
        q_rows = n_pool + index // n_pool
        graph = DiffGraph(parameters, record=train)
        support = graph.input(descriptors[s_rows], "support")
        query = graph.input(descriptors[q_rows], "query")
        chunk_scores = relate(graph, support, query)
        scores[start:stop] = chunk_scores.data
        part = graph.scale(episode_loss(graph, chunk_scores, flat_targets[start:stop]), (stop - start) / total, name="chunk_loss")
        loss += float(part.data)
        if train:
            graph.mark_forwarded({"loss": part})
            graph.backward("loss")
            np.add.at(adjoint, s_rows, graph.input_adjoint("support"))
            np.add.at(adjoint, q_rows, graph.input_adjoint("query"))
    return RelationOutcome(scores.reshape(n_query, n_pool), loss, adjoint)


def episode_targets(encoded: EncodedEpisode) -> np.ndarray:
    return relation_targets(encoded.support_labels, encoded.query_labels)


def accuracy(outcome: RelationOutcome, encoded: EncodedEpisode, n_classes: int) -> float:
    predictions = outcome.predictions(encoded.support_labels, n_classes)
    return float(np.mean(predictions == encoded.query_labels))
