"""Corpora, directory I/O and episode sampling."""

from salnet.data.dataset import Dataset, ImageSource, LabeledImage
from salnet.data.directory import export_directory, load_directory, resize_dataset
from salnet.data.episodes import Episode, QueryEntry, SupportEntry, sample_episode
from salnet.data.synthetic import SyntheticConfig, generate_synthetic, synthetic_config

__all__ = [
    "Dataset",
    "ImageSource",
    "LabeledImage",
    "Episode",
    "SupportEntry",
    "QueryEntry",
    "sample_episode",
    "load_directory",
    "export_directory",
    "resize_dataset",
    "SyntheticConfig",
    "synthetic_config",
    "generate_synthetic",
]
