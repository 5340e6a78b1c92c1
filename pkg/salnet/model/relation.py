"""
Similarity head, episodic loss and query classification.

Each (support, query) descriptor pair is stacked into a 2-channel K' x K'
input and scored by ``conv -> relu -> pool -> dense -> relu -> dense ->
sigmoid``. Parameters are named ``r.*``.
"""

from typing import Dict, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from salnet.autodiff.graph import DiffGraph
from salnet.autodiff.value import DiffValue
from salnet.model.layers import init_dense
from salnet.shared.exceptions import EmptyEpisodeError, ShapeMismatchError


class RelationConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    conv_channels: int = Field(default=8, ge=1)
    kernel: int = Field(default=3, ge=1)
    hidden: int = Field(default=8, ge=1)

    def flat_features(self, k_prime: int) -> int:
        side = k_prime // 2
        return self.conv_channels * side * side


def init_relation(config: RelationConfig, k_prime: int, rng: np.random.Generator) -> Dict[str, DiffValue]:
    if k_prime < 2:
        raise ShapeMismatchError("Relation head needs K' >= 2", node="r", details={"k_prime": k_prime})
    fan_in = 2 * config.kernel * config.kernel
    weight = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(config.conv_channels, 2, config.kernel, config.kernel))
    params = {
        "r.conv.weight": DiffValue(weight, name="r.conv.weight"),
        "r.conv.bias": DiffValue(np.zeros(config.conv_channels), name="r.conv.bias"),
    }
    params.update(init_dense("r.fc1", config.flat_features(k_prime), config.hidden, rng))
    params.update(init_dense("r.fc2", config.hidden, 1, rng))
    return params


def relate(graph: DiffGraph, support_desc: DiffValue, query_desc: DiffValue) -> DiffValue:
    """Score P descriptor pairs: (P, K', K') x (P, K', K') -> (P,) in (0, 1)."""
    if support_desc.shape != query_desc.shape or support_desc.data.ndim != 3:
        raise ShapeMismatchError(
            "relate expects two (P, K', K') batches of equal shape",
            node="r",
            details={"support": support_desc.shape, "query": query_desc.shape},
        )
    pairs, k_prime = support_desc.shape[0], support_desc.shape[1]
    stacked = graph.concatenate(
        [
            graph.reshape(support_desc, (pairs, 1, k_prime, k_prime)),
            graph.reshape(query_desc, (pairs, 1, k_prime, k_prime)),
        ],
        axis=1,
        name="r.stack",
    )
    x = graph.conv2d(stacked, graph.param("r.conv.weight"), graph.param("r.conv.bias"), name="r.conv")
    x = graph.max_pool2x2(graph.relu(x), name="r.pool")
    x = graph.flatten(x, start_axis=1)
    x = graph.relu(graph.add(graph.matmul(x, graph.param("r.fc1.weight")), graph.param("r.fc1.bias"), name="r.fc1"))
    x = graph.add(graph.matmul(x, graph.param("r.fc2.weight")), graph.param("r.fc2.bias"), name="r.fc2")
    return graph.reshape(graph.sigmoid(x, name="r.score"), (pairs,))


def relation_targets(support_labels: Sequence[int], query_labels: Sequence[int]) -> np.ndarray:
    """Query-major (Q, S) matrix of ``delta(l_s - l_q)``."""
    s = np.asarray(support_labels)
    q = np.asarray(query_labels)
    return (q[:, None] == s[None, :]).astype(np.float64)


def episode_loss(graph: DiffGraph, scores: DiffValue, targets: np.ndarray) -> DiffValue:
    """
    Mean of ``(r - delta)^2`` over every scored pair.

    Raises:
        EmptyEpisodeError: there are no pairs to score
    """
    if scores.size == 0:
        raise EmptyEpisodeError("Episode produced no query-support pairs")
    residual = graph.sub(scores, graph.constant(np.asarray(targets, dtype=np.float64).reshape(scores.shape)))
    return graph.mean_square(residual, name="loss")


def classify(scores: np.ndarray, support_labels: Sequence[int], n_classes: int) -> int:
    """
    Mean score per class over the support pool, then argmax; ties go to the lowest class id.

    ``scores[i]`` is the relation score of pool entry ``i`` against the query.
    """
    means = _class_means(scores, support_labels, n_classes)
    return int(np.argmax(means))


def _class_means(scores: np.ndarray, support_labels: Sequence[int], n_classes: int) -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(support_labels, dtype=np.int64)
    if scores.shape != labels.shape or scores.size == 0:
        raise ShapeMismatchError(
            "classify needs one label per pool score", node="classify",
            details={"scores": scores.shape, "labels": labels.shape},
        )
    means = np.full(n_classes, -np.inf)
    for c in range(n_classes):
        members = scores[labels == c]
        if members.size:
            means[c] = members.mean()
    return means
