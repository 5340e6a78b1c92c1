"""
One-key parameter sweeps.

``sweep`` trains and evaluates the base configuration once per value of a
single dotted key and writes ``<key>=<value>`` rows in the result schema, so
``emit_plots`` can draw accuracy against the swept value.

Typical keys: ``trir.beta``, ``prior.alpha``, ``w_shot``, ``n_way``,
``saliency_backend``, ``image_size``, ``dilation_radii``.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from salnet.config.constants import RESULT_COLUMNS
from salnet.config.run_config import RunConfig
from salnet.data.dataset import Dataset
from salnet.data.directory import resize_dataset
from salnet.harness.ablation import run_variant
from salnet.harness.metrics import write_rows
from salnet.harness.trainer import teacher_config, train
from salnet.model.hallucination import TrirMode
from salnet.shared.exceptions import ConfigurationError
from salnet.shared.logger import get_logger
from salnet.shared.utils.formatters import format_key_value, format_value

logger = get_logger(__name__)


def sweep_label(config: RunConfig, key: str) -> str:
    return f"{key}={format_value(config.flat()[key])}"


def _teacher_fingerprint(teacher: RunConfig) -> str:
    """Teacher identity; prior and TriR settings are inert once both are off."""
    return format_key_value(
        {key: value for key, value in teacher.flat().items() if not key.startswith(("prior.", "trir."))}
    )


def _slug(label: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "._=-" else "_" for ch in label)


def sweep(
    base: RunConfig,
    dataset: Dataset,
    key: str,
    values: Sequence[Any],
    out_dir: Path,
    seeds: Optional[Sequence[int]] = None,
) -> List[Dict[str, Any]]:
    """
    Run ``base`` with ``key`` set to each of ``values``; writes ``out_dir/sweep.csv``.

    Teachers are trained once per distinct teacher configuration and reused.

    Raises:
        ConfigurationError: unknown key, empty value list, or an invalid value
    """
    if key not in base.flat():
        raise ConfigurationError("Unknown sweep key", details={"key": key})
    if not values:
        raise ConfigurationError("Sweep needs at least one value", details={"key": key})
    out_dir = Path(out_dir)
    seeds = tuple(seeds) if seeds else (base.seed,)
    logger.log_action("sweep_started", key=key, values=[format_value(v) for v in values], seeds=list(seeds))

    teachers: Dict[str, Path] = {}
    rows: List[Dict[str, Any]] = []
    for value in values:
        for seed in seeds:
            config = base.with_overrides(**{"seed": seed, key: value})
            label = sweep_label(config, key)
            data = resize_dataset(dataset, config.image_size)
            run_dir = out_dir / _slug(label) / f"s{seed}"
            if config.trir.mode is not TrirMode.OFF and config.trir.teacher_checkpoint is None:
                teacher = teacher_config(config)
                fingerprint = _teacher_fingerprint(teacher)
                if fingerprint not in teachers:
                    teachers[fingerprint] = train(teacher, data, run_dir / "teacher").checkpoint
                    logger.log_action("teacher_trained", checkpoint=str(teachers[fingerprint]))
                config = config.with_overrides(**{"trir.teacher_checkpoint": str(teachers[fingerprint])})
            _, result = run_variant(config, data, run_dir, label)
            rows.append(
                {
                    "variant": label,
                    "shots": config.w_shot,
                    "seed": seed,
                    "accuracy": result.mean_accuracy,
                    "ci95": result.ci95,
                }
            )

    write_rows(out_dir / "sweep.csv", rows, RESULT_COLUMNS)
    return rows
