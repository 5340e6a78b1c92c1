"""
Tests for corpora and episode sampling.

Covers:
- PPM/PGM codec
- Synthetic generator: determinism, area bounds, config validation
- Class splits, directory load/export round trip and its error cases
- Episode sampling: layout, determinism, uniform class draws, insufficient data
"""

from collections import Counter

import numpy as np
import pytest

from salnet.config.constants import ALPHA_THRESHOLD, FG_AREA_BOUNDS
from salnet.data.dataset import Dataset, ImageSource, LabeledImage
from salnet.data.directory import export_directory, load_directory, resize_dataset
from salnet.data.episodes import sample_episode
from salnet.data.netpbm import read_pgm, read_ppm, write_pgm, write_ppm
from salnet.data.shapes import SHAPES, render_alpha
from salnet.data.synthetic import generate_synthetic, synthetic_config
from salnet.data.textures import TEXTURES, render_background
from salnet.shared.exceptions import (
    DataError,
    EmptyClassError,
    InsufficientDataError,
    ParameterRangeError,
    UnreadableFileError,
)


def _flat_dataset(num_classes: int, per_class: int, size: int = 8) -> Dataset:
    images = tuple(
        LabeledImage(image=np.full((3, size, size), c / num_classes), class_id=c, name=f"c{c}/{i}")
        for c in range(num_classes)
        for i in range(per_class)
    )
    return Dataset(images, tuple(f"class{c}" for c in range(num_classes)), size)


# ============================================================================
# Netpbm
# ============================================================================


def test_ppm_and_pgm_quantize_to_8_bits(tmp_path, rng):
    image = rng.uniform(size=(3, 5, 7))
    mask = rng.uniform(size=(5, 7))
    read_image = read_ppm(write_ppm(tmp_path / "a.ppm", image))
    read_mask = read_pgm(write_pgm(tmp_path / "a.pgm", mask))
    assert read_image.shape == (3, 5, 7)
    assert read_mask.shape == (5, 7)
    assert np.max(np.abs(read_image - image)) <= 0.5 / 255 + 1e-12
    assert np.max(np.abs(read_mask - mask)) <= 0.5 / 255 + 1e-12


def test_ascii_ppm_with_comments(tmp_path):
    path = tmp_path / "ascii.ppm"
    path.write_text("P3\n# a comment\n2 1\n255\n255 0 0  0 0 255\n")
    image = read_ppm(path)
    np.testing.assert_array_equal(image[:, 0, 0], [1.0, 0.0, 0.0])
    np.testing.assert_array_equal(image[:, 0, 1], [0.0, 0.0, 1.0])


def test_corrupt_ppm_names_file(tmp_path):
    path = tmp_path / "broken.ppm"
    path.write_bytes(b"P6\n4 4\n255\n\x00\x01")
    with pytest.raises(UnreadableFileError) as exc:
        read_ppm(path)
    assert "broken.ppm" in str(exc.value)


# ============================================================================
# Synthetic generator
# ============================================================================


def test_synthetic_generation_is_deterministic():
    config = synthetic_config(num_classes=3, images_per_class=2, image_size=16, seed=9)
    first, second = generate_synthetic(config), generate_synthetic(config)
    for a, b in zip(first.images, second.images):
        assert np.array_equal(a.image, b.image)
        assert np.array_equal(a.oracle_mask, b.oracle_mask)


def test_synthetic_images_respect_area_bounds_and_value_range(tiny_dataset):
    low, high = FG_AREA_BOUNDS
    for item in tiny_dataset.images:
        area = float(np.mean(item.oracle_mask >= ALPHA_THRESHOLD))
        assert low <= area <= high
        assert item.image.min() >= 0.0 and item.image.max() <= 1.0
        assert item.source is ImageSource.SYNTHETIC


def test_synthetic_class_names_follow_shape_families(tiny_dataset):
    assert tiny_dataset.num_classes == 10
    assert tiny_dataset.class_names[0] == f"00_{list(SHAPES)[0]}"
    assert len(tiny_dataset) == 80


def test_every_shape_and_texture_renders():
    for family in SHAPES:
        alpha = render_alpha(family, 24, (12.0, 12.0), 8.0, 0.3, 4)
        assert alpha.shape == (24, 24)
        assert 0.0 < alpha.mean() < 1.0, family
    for family in TEXTURES:
        background = render_background(family, np.random.default_rng(0), 16)
        assert background.shape == (3, 16, 16)
        assert background.min() >= 0.0 and background.max() <= 1.0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"num_classes": 1},
        {"image_size": 8},
        {"num_classes": 3, "fg_shape_families": ["disk", "nonagon", "ring"]},
        {"num_classes": 30},
    ],
)
def test_synthetic_config_rejects_bad_values(kwargs):
    with pytest.raises(ParameterRangeError):
        synthetic_config(**kwargs)


# ============================================================================
# Dataset and directory I/O
# ============================================================================


def test_split_twenty_classes_is_12_3_5():
    parts = _flat_dataset(20, 2).split((0.6, 0.15, 0.25))
    assert [parts[k].num_classes for k in ("train", "val", "test")] == [12, 3, 5]
    names = [set(parts[k].class_names) for k in ("train", "val", "test")]
    assert not (names[0] & names[1] or names[0] & names[2] or names[1] & names[2])
    assert {item.class_id for item in parts["test"].images} == set(range(5))


@pytest.mark.parametrize("ratios", [(0.5, 0.5), (0.7, 0.2, 0.2), (-0.1, 0.6, 0.5)])
def test_split_rejects_bad_ratios(ratios):
    with pytest.raises(ParameterRangeError):
        _flat_dataset(10, 1).split(ratios)


def test_labeled_image_validates_mask():
    with pytest.raises(DataError):
        LabeledImage(image=np.zeros((3, 4, 4)), class_id=0, oracle_mask=np.zeros((3, 3)))
    with pytest.raises(DataError):
        LabeledImage(image=np.zeros((3, 4, 4)), class_id=0, oracle_mask=np.full((4, 4), 1.5))


def test_export_then_load_directory(tmp_path):
    dataset = generate_synthetic(synthetic_config(num_classes=2, images_per_class=3, image_size=16, seed=1))
    root = export_directory(dataset, tmp_path / "corpus")
    loaded = load_directory(root, 16)
    assert loaded.class_names == dataset.class_names
    assert len(loaded) == len(dataset)
    for original, item in zip(dataset.images, loaded.images):
        assert item.source is ImageSource.FILE
        assert np.max(np.abs(item.image - original.image)) <= 0.5 / 255 + 1e-12
        assert item.oracle_mask is not None


def test_load_directory_resizes_to_image_size(tmp_path):
    dataset = generate_synthetic(synthetic_config(num_classes=2, images_per_class=1, image_size=16))
    loaded = load_directory(export_directory(dataset, tmp_path / "c"), 24)
    assert loaded.image_size == 24
    assert loaded[0].image.shape == (3, 24, 24)
    assert loaded[0].oracle_mask.shape == (24, 24)


def test_load_directory_errors(tmp_path):
    with pytest.raises(UnreadableFileError):
        load_directory(tmp_path / "missing", 16)
    (tmp_path / "empty_root").mkdir()
    with pytest.raises(EmptyClassError):
        load_directory(tmp_path / "empty_root", 16)
    (tmp_path / "one" / "cls").mkdir(parents=True)
    with pytest.raises(EmptyClassError):
        load_directory(tmp_path / "one", 16)


def test_resize_dataset_keeps_labels(tiny_dataset):
    resized = resize_dataset(tiny_dataset, 24)
    assert resized.image_size == 24
    assert [i.class_id for i in resized.images] == [i.class_id for i in tiny_dataset.images]
    assert resize_dataset(tiny_dataset, 16) is tiny_dataset


# ============================================================================
# Episodes
# ============================================================================


def test_episode_layout_and_disjoint_images():
    dataset = _flat_dataset(6, 5)
    episode = sample_episode(dataset, 3, 2, 2, np.random.default_rng(0))
    assert len(episode.support) == 6 and len(episode.queries) == 6
    assert list(episode.support_slots) == [0, 0, 1, 1, 2, 2]
    assert list(episode.query_slots) == [0, 0, 1, 1, 2, 2]
    used = [s.image_index for s in episode.support] + [q.image_index for q in episode.queries]
    assert len(set(used)) == len(used)
    for entry in episode.support:
        assert dataset[entry.image_index].class_id == episode.classes[entry.class_slot]


def test_episode_sampling_is_deterministic():
    dataset = _flat_dataset(6, 5)
    first = sample_episode(dataset, 4, 1, 3, np.random.default_rng([5, 1, 0]))
    second = sample_episode(dataset, 4, 1, 3, np.random.default_rng([5, 1, 0]))
    assert first == second


def test_class_draws_are_uniform():
    dataset = _flat_dataset(5, 2)
    rng = np.random.default_rng(42)
    counts = Counter()
    draws = 4000
    for _ in range(draws):
        counts.update(sample_episode(dataset, 2, 1, 1, rng).classes)
    expected = draws * 2 / 5
    for class_id in range(5):
        assert abs(counts[class_id] - expected) < 0.08 * expected


def test_insufficient_data_names_class():
    images = list(_flat_dataset(3, 4).images)[:-2]
    dataset = Dataset(tuple(images), ("a", "b", "c"), 8)
    with pytest.raises(InsufficientDataError) as exc:
        sample_episode(dataset, 3, 2, 1, np.random.default_rng(0))
    assert exc.value.details["class"] == "c"


def test_too_few_classes_and_bad_sizes():
    dataset = _flat_dataset(2, 4)
    with pytest.raises(InsufficientDataError):
        sample_episode(dataset, 3, 1, 1, np.random.default_rng(0))
    with pytest.raises(ParameterRangeError):
        sample_episode(dataset, 0, 1, 1, np.random.default_rng(0))
