"""
Tests for the relation head, episodic loss and classification.

Covers:
- Targets and loss arithmetic
- Score range and shape checks of the head
- Class-mean classification with lowest-id tie breaking
- Chunked scoring matches a single chunk
"""

import numpy as np
import pytest

from salnet.autodiff.graph import DiffGraph
from salnet.harness.pipeline import relation_stage
from salnet.model.relation import (
    RelationConfig,
    classify,
    episode_loss,
    init_relation,
    relate,
    relation_targets,
)
from salnet.shared.exceptions import EmptyEpisodeError, ShapeMismatchError


@pytest.fixture
def head(rng):
    return init_relation(RelationConfig(conv_channels=2, hidden=4), 4, rng)


# ============================================================================
# Targets and loss
# ============================================================================


def test_targets_are_query_major_indicators():
    targets = relation_targets([0, 0, 1], [1, 0])
    np.testing.assert_array_equal(targets, [[0, 0, 1], [1, 1, 0]])


def test_loss_reference_value():
    graph = DiffGraph(record=False)
    loss = episode_loss(graph, graph.constant(np.array([0.8, 0.1])), np.array([1.0, 0.0]))
    assert float(loss.data) == pytest.approx(0.025)


def test_graph_loss_matches_numpy():
    graph = DiffGraph(record=False)
    scores = np.array([[0.8, 0.1, 0.4]])
    targets = np.array([[1.0, 0.0, 1.0]])
    value = episode_loss(graph, graph.constant(scores), targets).data
    assert float(value) == pytest.approx(np.mean((scores - targets) ** 2))


def test_empty_episode_raises():
    graph = DiffGraph(record=False)
    with pytest.raises(EmptyEpisodeError):
        episode_loss(graph, graph.constant(np.zeros(0)), np.zeros(0))


# ============================================================================
# Relation head
# ============================================================================


def test_scores_lie_in_unit_interval(head, rng):
    graph = DiffGraph(head, record=False)
    support = graph.constant(rng.normal(size=(5, 4, 4)))
    query = graph.constant(rng.normal(size=(5, 4, 4)))
    scores = relate(graph, support, query).data
    assert scores.shape == (5,)
    assert np.all((scores > 0) & (scores < 1))


def test_relate_rejects_mismatched_batches(head):
    graph = DiffGraph(head, record=False)
    with pytest.raises(ShapeMismatchError):
        relate(graph, graph.constant(np.zeros((2, 4, 4))), graph.constant(np.zeros((3, 4, 4))))


def test_head_needs_two_by_two_descriptors(rng):
    with pytest.raises(ShapeMismatchError):
        init_relation(RelationConfig(), 1, rng)


# ============================================================================
# Classification
# ============================================================================


def test_classify_uses_class_means():
    # class 0 has the single best score but the lower mean
    scores = np.array([0.95, 0.1, 0.7, 0.7])
    labels = [0, 0, 1, 1]
    assert classify(scores, labels, 2) == 1


def test_classify_ties_go_to_lowest_class():
    assert classify(np.array([0.5, 0.5, 0.5]), [2, 1, 0], 3) == 0
    assert classify(np.array([0.3, 0.6, 0.6]), [0, 2, 1], 3) == 1


def test_classify_ignores_classes_without_pool_entries():
    assert classify(np.array([0.1]), [2], 3) == 2


def test_classify_shape_check():
    with pytest.raises(ShapeMismatchError):
        classify(np.array([0.1, 0.2]), [0], 2)


# ============================================================================
# Chunked relation stage
# ============================================================================


def test_chunking_does_not_change_results(head, rng):
    descriptors = rng.normal(size=(7, 4, 4))
    targets = relation_targets([0, 0, 1, 1], [0, 1, 1])
    whole = relation_stage(head, descriptors, 4, targets, pair_chunk=64, train=True)
    for value in head.values():
        value.zero_adjoint()
    chunked = relation_stage(head, descriptors, 4, targets, pair_chunk=5, train=True)
    np.testing.assert_allclose(chunked.scores, whole.scores, atol=1e-14)
    assert chunked.loss == pytest.approx(whole.loss, abs=1e-14)
    np.testing.assert_allclose(chunked.descriptor_adjoint, whole.descriptor_adjoint, atol=1e-12)
    assert chunked.scores.shape == (3, 4)


def test_relation_stage_rejects_empty_pool(head):
    with pytest.raises(EmptyEpisodeError):
        relation_stage(head, np.zeros((2, 4, 4)), 2, np.zeros((0, 2)), 8, train=False)


def test_relation_stage_agrees_with_loss_and_classify(head, rng):
    descriptors = rng.normal(size=(6, 4, 4))
    pool_labels = np.array([0, 1, 1, 0])
    targets = relation_targets(pool_labels, [1, 0])
    outcome = relation_stage(head, descriptors, 4, targets, pair_chunk=64, train=False)
    graph = DiffGraph(record=False)
    expected = episode_loss(graph, graph.constant(outcome.scores), targets)
    assert outcome.loss == pytest.approx(float(expected.data), abs=1e-14)
    predictions = outcome.predictions(pool_labels, 2)
    assert list(predictions) == [classify(row, pool_labels, 2) for row in outcome.scores]
