"""
Tests for support-set hallucination.

Covers:
- Exhaustive pair counts for intra- and inter-class pairing
- Similarity prior profile, SSP scaling and HSP filtering
- TriR penalty values and its reconstruction check
"""

import numpy as np
import pytest

from salnet.autodiff.graph import DiffGraph
from salnet.data.episodes import Episode, SupportEntry
from salnet.model.hallucination import (
    HallucinatedSample,
    Strategy,
    apply_hsp,
    apply_ssp,
    background_distance,
    check_reconstruction,
    enumerate_inter,
    enumerate_intra,
    enumerate_pairs,
    prior_probability,
    trir_omega,
)
from salnet.shared.exceptions import ConstraintViolationError, ParameterRangeError, ShapeMismatchError


def _episode(n_way: int, w_shot: int) -> Episode:
    support = tuple(
        SupportEntry(image_index=n * w_shot + w, class_slot=n, shot_slot=w)
        for n in range(n_way)
        for w in range(w_shot)
    )
    return Episode(n_way, w_shot, 0, tuple(range(n_way)), support, ())


def _samples(priors):
    return [HallucinatedSample(i, i + 1, 0, None, 0, prior_p=p) for i, p in enumerate(priors)]


# ============================================================================
# Pair enumeration
# ============================================================================


@pytest.mark.parametrize("n_way", range(2, 11))
@pytest.mark.parametrize("w_shot", range(1, 6))
@pytest.mark.parametrize("variants", [1, 2])
def test_pair_counts(n_way, w_shot, variants):
    episode = _episode(n_way, w_shot)
    supports = n_way * w_shot
    intra = enumerate_intra(episode, variants)
    inter = enumerate_inter(episode, variants)
    assert len(intra) == supports * variants * (w_shot - 1)
    assert len(inter) == supports * variants * (w_shot - 1 + w_shot * (n_way - 1))
    slots = episode.support_slots
    assert all(slots[p.fg_source] == slots[p.bg_source] and p.fg_source != p.bg_source for p in intra)
    assert all(p.fg_source != p.bg_source for p in inter)
    assert len(set(inter)) == len(inter)


def test_one_shot_intra_is_empty():
    assert enumerate_intra(_episode(5, 1)) == []
    assert enumerate_pairs(Strategy.NONE, _episode(5, 3)) == []
    assert enumerate_pairs("inter", _episode(2, 1)) == enumerate_inter(_episode(2, 1))


# ============================================================================
# Similarity prior
# ============================================================================


def test_prior_reference_values():
    assert prior_probability(1.0, 1.0) == pytest.approx(0.5378828427, abs=1e-10)
    assert prior_probability(0.0, 5.0) == 1.0
    assert prior_probability(123.0, 0.0) == 1.0


def test_prior_strictly_decreasing_in_distance(rng):
    p = prior_probability(np.sort(rng.uniform(0.0, 20.0, size=1000)), 0.8)
    assert np.all(np.diff(p) < 0)
    assert np.all((p > 0) & (p <= 1))


def test_prior_rejects_negative_alpha():
    with pytest.raises(ParameterRangeError):
        prior_probability(1.0, -0.1)


def test_background_distance(rng):
    a, b = rng.normal(size=(4, 3, 3)), rng.normal(size=(4, 3, 3))
    assert background_distance(a, b) == pytest.approx(float(np.sum((a - b) ** 2)))
    assert background_distance(a, a) == 0.0
    with pytest.raises(ShapeMismatchError):
        background_distance(a, b[:2])


def test_ssp_with_alpha_zero_is_identity(rng):
    phi = rng.normal(size=(3, 2, 2, 2))
    graph = DiffGraph(record=False)
    p = prior_probability(rng.uniform(0, 10, size=3), 0.0)
    np.testing.assert_array_equal(apply_ssp(graph, graph.constant(phi), p).data, phi)


def test_ssp_scales_each_row(rng):
    phi = rng.normal(size=(2, 3, 2, 2))
    graph = DiffGraph(record=False)
    out = apply_ssp(graph, graph.constant(phi), np.array([0.5, 0.25])).data
    np.testing.assert_allclose(out[0], 0.5 * phi[0])
    np.testing.assert_allclose(out[1], 0.25 * phi[1])


def test_hsp_tau_zero_keeps_everything():
    samples = _samples([0.01, 0.3, 0.99])
    assert apply_hsp(samples, 0.0) == samples


def test_hsp_is_monotone_in_tau(rng):
    samples = _samples(rng.uniform(0.0, 1.0, size=50))
    previous = apply_hsp(samples, 0.0)
    for tau in (0.1, 0.3, 0.5, 0.7, 0.9):
        kept = apply_hsp(samples, tau)
        assert set(map(id, kept)) <= set(map(id, previous))
        assert all(s.prior_p > tau for s in kept)
        previous = kept


@pytest.mark.parametrize("tau", [-0.1, 1.0])
def test_hsp_tau_range(tau):
    with pytest.raises(ParameterRangeError):
        apply_hsp([], tau)


# ============================================================================
# TriR
# ============================================================================


def test_omega_reference_value():
    graph = DiffGraph(record=False)
    student = graph.constant(np.ones((2, 1, 2, 2)))
    teacher = np.zeros((2, 1, 2, 2))
    teacher[0, 0, 0, 0] = 3.0
    # ((3-1)^2 + 3*1 + 4*1) / 2
    assert trir_omega(graph, student, teacher).data == pytest.approx(5.5)


def test_omega_zero_when_maps_agree(rng):
    maps = rng.normal(size=(3, 2, 2, 2))
    graph = DiffGraph(record=False)
    assert float(trir_omega(graph, graph.constant(maps), maps.copy()).data) == 0.0


def test_omega_gradient_skips_teacher(rng):
    student, teacher = rng.normal(size=(2, 3, 2, 2)), rng.normal(size=(2, 3, 2, 2))
    graph = DiffGraph()
    s = graph.input(student, "student")
    graph.mark_forwarded({"omega": trir_omega(graph, s, teacher)})
    graph.backward("omega")
    np.testing.assert_allclose(graph.input_adjoint("student"), (student - teacher), rtol=1e-10)


def test_omega_shape_mismatch():
    graph = DiffGraph(record=False)
    with pytest.raises(ShapeMismatchError):
        trir_omega(graph, graph.constant(np.zeros((2, 1, 2, 2))), np.zeros((1, 1, 2, 2)))


def test_reconstruction_check(rng):
    image = rng.uniform(size=(3, 4, 4))
    h = rng.uniform(size=(4, 4))
    back = image - h * image
    check_reconstruction(image - back, back, image)
    with pytest.raises(ConstraintViolationError):
        check_reconstruction(h * image, (1.0 - h) * image + 1e-3, image, name="bad")
