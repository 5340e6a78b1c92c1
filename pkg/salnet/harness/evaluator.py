"""
Episodic evaluation of a trained checkpoint.

Episodes are independent: each one seeds its own generator from
``(seed, eval stream, episode index)`` and runs on inference graphs over a
read-only parameter snapshot, so they are spread over a thread pool and the
result does not depend on the worker count.
"""

from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, Mapping, Optional

import numpy as np

from salnet.autodiff.graph import DiffGraph
from salnet.autodiff.value import DiffValue
from salnet.config.constants import EVAL_LOG_COLUMNS
from salnet.config.run_config import RunConfig
from salnet.config.settings import settings
from salnet.data.dataset import Dataset
from salnet.data.episodes import sample_episode
from salnet.harness.metrics import EvalResult, write_rows
from salnet.harness.pipeline import accuracy, encode_episode, episode_targets, prepare_episode, relation_stage
from salnet.model.network import SalNet
from salnet.shared.exceptions import UnreadableFileError
from salnet.shared.logger import get_logger

logger = get_logger(__name__)

EVAL_STREAM = 2


def evaluate_episode(
    parameters: Mapping[str, DiffValue],
    config: RunConfig,
    dataset: Dataset,
    index: int,
    pair_chunk: int,
) -> float:
    """Accuracy in [0, 1] of one evaluation episode."""
    rng = np.random.default_rng([config.seed, EVAL_STREAM, index])
    episode = sample_episode(dataset, config.n_way, config.w_shot, config.q_test, rng)
    inputs = prepare_episode(dataset, episode, config)
    graph = DiffGraph(parameters, record=False)
    encoded = encode_episode(graph, config, inputs, episode)
    outcome = relation_stage(
        parameters, encoded.descriptors.data, encoded.n_pool, episode_targets(encoded), pair_chunk, train=False
    )
    return accuracy(outcome, encoded, episode.n_way)


def evaluate_parameters(
    parameters: Mapping[str, DiffValue],
    config: RunConfig,
    dataset: Dataset,
    workers: Optional[int] = None,
    pair_chunk: Optional[int] = None,
    on_episode: Optional[Callable[[int], None]] = None,
) -> EvalResult:
    """
    Evaluate in-memory parameters on ``config.eval_split`` of ``dataset``.

    Raises:
        InsufficientDataError: the split cannot supply an episode
    """
    split = dataset.split(config.split)[config.eval_split]
    workers = workers or settings.app.eval_workers
    pair_chunk = pair_chunk or settings.app.pair_chunk

    # Fail fast on an undersized split before starting workers.
    sample_episode(split, config.n_way, config.w_shot, config.q_test, np.random.default_rng([config.seed, EVAL_STREAM, 0]))

    def run(index: int) -> float:
        value = evaluate_episode(parameters, config, split, index, pair_chunk)
        if on_episode is not None:
            on_episode(index)
        return value

    with ThreadPoolExecutor(max_workers=workers) as pool:
        accuracies = list(pool.map(run, range(config.episodes_eval)))
    result = EvalResult.from_episodes(accuracies)
    logger.info(
        "Evaluation finished",
        split=config.eval_split,
        episodes=config.episodes_eval,
        accuracy=round(result.mean_accuracy, 2),
        ci95=round(result.ci95, 2),
    )
    return result


def evaluate(
    checkpoint: Path,
    config: RunConfig,
    dataset: Dataset,
    workers: Optional[int] = None,
    pair_chunk: Optional[int] = None,
    on_episode: Optional[Callable[[int], None]] = None,
) -> EvalResult:
    """
    Load ``checkpoint`` into a model shaped by ``config`` and evaluate it.

    Raises:
        UnreadableFileError: the checkpoint does not exist
        CheckpointError: the file does not match the architecture
    """
    checkpoint = Path(checkpoint)
    if not checkpoint.is_file():
        raise UnreadableFileError("Checkpoint not found", path=str(checkpoint))
    model = SalNet(config.encoder, config.relation).load(checkpoint)
    return evaluate_parameters(model.snapshot(), config, dataset, workers, pair_chunk, on_episode)


def write_eval_log(path: Path, result: EvalResult) -> Path:
    rows: list[Dict[str, float]] = [
        {"episode": i, "accuracy": value} for i, value in enumerate(result.per_episode)
    ]
    return write_rows(path, rows, EVAL_LOG_COLUMNS)
