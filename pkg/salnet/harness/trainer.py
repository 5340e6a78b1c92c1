"""
Episodic training.

Every episode: sample, build masks and splits, encode, hallucinate, apply
priors, score all query-support pairs and take one Adam step on
``L' = L + beta * Omega``. Artifacts written to the run directory:

    config.txt       the run configuration, verbatim
    model.ckpt       final parameters (float32)
    train_log.csv    episode,loss,omega,loss_total,accuracy
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from salnet.autodiff.graph import DiffGraph
from salnet.autodiff.optim import Adam
from salnet.autodiff.value import DiffValue
from salnet.config.constants import TRAIN_LOG_COLUMNS
from salnet.config.run_config import Encoding, RunConfig
from salnet.config.settings import settings
from salnet.data.dataset import Dataset
from salnet.data.episodes import sample_episode
from salnet.harness.metrics import write_rows
from salnet.harness.pipeline import (
    accuracy,
    encode_episode,
    episode_targets,
    prepare_episode,
    relation_stage,
    teacher_maps,
)
from salnet.model.hallucination import PriorMode, Strategy, TrirMode
from salnet.model.network import SalNet
from salnet.shared.exceptions import DivergenceError, MissingTeacherError
from salnet.shared.logger import get_logger

logger = get_logger(__name__)

TRAIN_STREAM = 1


@dataclass
class TrainResult:
    run_dir: Path
    checkpoint: Path
    log_path: Path
    config_path: Path
    rows: List[Dict[str, float]]

    @property
    def losses(self) -> List[float]:
        return [row["loss_total"] for row in self.rows]


def load_teacher(config: RunConfig) -> Optional[Dict[str, DiffValue]]:
    """
    Frozen teacher parameters, or None when TriR is off.

    Raises:
        MissingTeacherError: TriR is on and the checkpoint is unset or absent
    """
    if config.trir.mode is TrirMode.OFF:
        return None
    path = config.trir.teacher_checkpoint
    if path is None or not Path(path).is_file():
        raise MissingTeacherError(
            "TriR needs a trained teacher checkpoint",
            details={"teacher_checkpoint": str(path) if path else None, "mode": config.trir.mode.value},
        )
    return SalNet(config.encoder, config.relation).load(Path(path)).snapshot()


class Trainer:
    """
    Args:
        config: Run configuration
        dataset: Full corpus; training uses its train class split
        run_dir: Artifact directory
        pair_chunk: Relation pairs per graph (defaults to ``settings.app.pair_chunk``)
        on_episode: Called with the episode index after each update
    """

    def __init__(
        self,
        config: RunConfig,
        dataset: Dataset,
        run_dir: Path,
        pair_chunk: Optional[int] = None,
        on_episode: Optional[Callable[[int], None]] = None,
    ):
        self.config = config
        self.train_set = dataset.split(config.split)["train"]
        self.run_dir = Path(run_dir)
        self.pair_chunk = pair_chunk or settings.app.pair_chunk
        self.on_episode = on_episode
        self.teacher = load_teacher(config)
        self.model = SalNet(config.encoder, config.relation, seed=config.seed)
        self.optimizer = Adam(self.model.parameters, lr=config.lr)
        self.logger = logger.child(run_id=self.run_dir.name, seed=config.seed)

    def train_episode(self, index: int) -> Dict[str, float]:
        """
        One sampled episode and one optimizer step.

        Raises:
            DivergenceError: the loss is not finite
        """
        config = self.config
        rng = np.random.default_rng([config.seed, TRAIN_STREAM, index])
        episode = sample_episode(self.train_set, config.n_way, config.w_shot, config.q_train, rng)
        inputs = prepare_episode(self.train_set, episode, config)
        teacher = teacher_maps(self.teacher, config, inputs) if self.teacher is not None else None

        graph = DiffGraph(self.model.parameters, rng_seed=config.seed)
        encoded = encode_episode(graph, config, inputs, episode, teacher, self.logger)
        outcome = relation_stage(
            self.model.parameters,
            encoded.descriptors.data,
            encoded.n_pool,
            episode_targets(encoded),
            self.pair_chunk,
            train=True,
        )

        omega = float(encoded.omega.data) if encoded.omega is not None else 0.0
        beta = config.trir.beta if encoded.omega is not None else 0.0
        total = outcome.loss + beta * omega
        if not np.isfinite(total):
            raise DivergenceError(
                "Training loss is not finite", details={"episode": index, "loss": outcome.loss, "omega": omega}
            )

        outputs = {"descriptors": encoded.descriptors}
        seeds = {"descriptors": outcome.descriptor_adjoint}
        if encoded.omega is not None:
            outputs["omega"] = encoded.omega
            seeds["omega"] = np.asarray(beta)
        graph.mark_forwarded(outputs)
        graph.backward_many(seeds)
        self.optimizer.step()

        return {
            "episode": index,
            "loss": outcome.loss,
            "omega": omega,
            "loss_total": total,
            "accuracy": accuracy(outcome, encoded, episode.n_way),
        }

    def run(self) -> TrainResult:
        config = self.config
        self.run_dir.mkdir(parents=True, exist_ok=True)
        config_path = config.save(self.run_dir / "config.txt")
        self.logger.log_action(
            "train_started",
            episodes=config.episodes_train,
            strategy=config.strategy.value,
            encoding=config.encoding.value,
            trir=config.trir.mode.value,
            prior=config.prior.mode.value,
        )

        rows: List[Dict[str, float]] = []
        for index in range(config.episodes_train):
            row = self.train_episode(index)
            rows.append(row)
            if (index + 1) % config.log_every == 0 or index + 1 == config.episodes_train:
                recent = rows[-config.log_every :]
                self.logger.info(
                    "Training progress",
                    episode=index + 1,
                    loss=round(float(np.mean([r["loss"] for r in recent])), 5),
                    omega=round(float(np.mean([r["omega"] for r in recent])), 5),
                    accuracy=round(float(np.mean([r["accuracy"] for r in recent])), 4),
                )
            if self.on_episode is not None:
                self.on_episode(index)

        self.model.quantize()
        checkpoint = self.model.save(self.run_dir / "model.ckpt")
        log_path = write_rows(self.run_dir / "train_log.csv", rows, TRAIN_LOG_COLUMNS)
        self.logger.log_action("train_finished", checkpoint=str(checkpoint))
        return TrainResult(self.run_dir, checkpoint, log_path, config_path, rows)


def train(
    config: RunConfig,
    dataset: Dataset,
    run_dir: Path,
    pair_chunk: Optional[int] = None,
    on_episode: Optional[Callable[[int], None]] = None,
) -> TrainResult:
    return Trainer(config, dataset, run_dir, pair_chunk, on_episode).run()


def teacher_config(config: RunConfig) -> RunConfig:
    """
    The baseline run whose checkpoint serves as ``config``'s TriR teacher.

    ``teacher_full_image`` learns from whole images (no saliency split);
    ``teacher_fgbg`` from each image's own foreground and background.
    """
    encoding = Encoding.WHOLE_IMAGE if config.trir.mode is TrirMode.TEACHER_FULL_IMAGE else Encoding.FGBG
    return config.with_overrides(
        **{
            "encoding": encoding,
            "strategy": Strategy.NONE,
            "prior.mode": PriorMode.NONE,
            "trir.mode": TrirMode.OFF,
            "trir.teacher_checkpoint": "",
        }
    )


def ensure_teacher(config: RunConfig, dataset: Dataset, run_dir: Path) -> RunConfig:
    """
    Train the teacher under ``run_dir/teacher`` when TriR is on and no
    checkpoint exists yet; returns the config pointing at it.
    """
    if config.trir.mode is TrirMode.OFF:
        return config
    existing = config.trir.teacher_checkpoint
    if existing is not None and Path(existing).is_file():
        return config
    result = train(teacher_config(config), dataset, Path(run_dir) / "teacher")
    logger.log_action("teacher_trained", checkpoint=str(result.checkpoint), mode=config.trir.mode.value)
    return config.with_overrides(**{"trir.teacher_checkpoint": str(result.checkpoint)})
