"""
Ablation runner.

Trains and evaluates the eight variants for every shot count and seed of the
base configuration. All variants of one (shots, seed) cell share the seed, so
episode streams and initial parameters match across rows. TriR variants reuse
the checkpoint of the baseline row that serves as their teacher.

Layout under ``out_dir``::

    w1/s0/wo_hal/{config.txt,model.ckpt,train_log.csv,eval_log.csv}
    ...
    ablation.csv
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence

from rich.table import Table

from salnet.config.constants import ABLATION_VARIANTS, RESULT_COLUMNS
from salnet.config.run_config import Encoding, RunConfig
from salnet.data.dataset import Dataset
from salnet.harness.evaluator import evaluate, write_eval_log
from salnet.harness.metrics import EvalResult, write_rows
from salnet.harness.trainer import train
from salnet.model.hallucination import PriorMode, Strategy, TrirMode
from salnet.shared.exceptions import ConfigurationError
from salnet.shared.logger import get_logger
from salnet.shared.utils.formatters import format_accuracy

logger = get_logger(__name__)

WHOLE_IMAGE_BASELINE = "w/o Sal. Seg."
FGBG_BASELINE = "w/o Hal."


@dataclass(frozen=True)
class VariantSpec:
    name: str
    slug: str
    encoding: Encoding = Encoding.FGBG
    strategy: Strategy = Strategy.NONE
    trir: bool = False
    prior: PriorMode = PriorMode.NONE


VARIANT_SPECS: Dict[str, VariantSpec] = {
    spec.name: spec
    for spec in (
        VariantSpec(WHOLE_IMAGE_BASELINE, "wo_sal_seg", encoding=Encoding.WHOLE_IMAGE),
        VariantSpec(FGBG_BASELINE, "wo_hal"),
        VariantSpec("Intra.-Hal.", "intra", strategy=Strategy.INTRA),
        VariantSpec("Intra.-Hal.+TriR", "intra_trir", strategy=Strategy.INTRA, trir=True),
        VariantSpec("Inter.-Hal.", "inter", strategy=Strategy.INTER),
        VariantSpec("Inter.-Hal.+TriR", "inter_trir", strategy=Strategy.INTER, trir=True),
        VariantSpec("Inter.-Hal.+TriR+HSP", "inter_trir_hsp", strategy=Strategy.INTER, trir=True, prior=PriorMode.HSP),
        VariantSpec("Inter.-Hal.+TriR+SSP", "inter_trir_ssp", strategy=Strategy.INTER, trir=True, prior=PriorMode.SSP),
    )
}


def trir_mode_for(base: RunConfig) -> TrirMode:
    """TriR variants use the base config's teacher mode, ``teacher_fgbg`` when it is off."""
    return base.trir.mode if base.trir.mode is not TrirMode.OFF else TrirMode.TEACHER_FGBG


def teacher_variant(mode: TrirMode) -> str:
    return WHOLE_IMAGE_BASELINE if mode is TrirMode.TEACHER_FULL_IMAGE else FGBG_BASELINE


def variant_config(
    base: RunConfig,
    name: str,
    shots: int,
    seed: int,
    teacher_checkpoint: Optional[Path] = None,
) -> RunConfig:
    spec = VARIANT_SPECS[name]
    overrides: Dict[str, Any] = {
        "w_shot": shots,
        "seed": seed,
        "encoding": spec.encoding,
        "strategy": spec.strategy,
        "prior.mode": spec.prior,
        "trir.mode": trir_mode_for(base) if spec.trir else TrirMode.OFF,
        "trir.teacher_checkpoint": str(teacher_checkpoint) if spec.trir and teacher_checkpoint else "",
    }
    return base.with_overrides(**overrides)


@dataclass
class AblationResult:
    rows: List[Dict[str, Any]]
    path: Path

    def table(self) -> Table:
        table = Table(title="Ablation")
        shot_values = sorted({row["shots"] for row in self.rows})
        table.add_column("variant")
        for shots in shot_values:
            table.add_column(f"{shots}-shot", justify="right")
        for name in ABLATION_VARIANTS:
            cells = []
            for shots in shot_values:
                picked = [row for row in self.rows if row["variant"] == name and row["shots"] == shots]
                if not picked:
                    cells.append("-")
                    continue
                mean = sum(row["accuracy"] for row in picked) / len(picked)
                ci = sum(row["ci95"] for row in picked) / len(picked)
                cells.append(format_accuracy(mean, ci))
            table.add_row(name, *cells)
        return table


def run_variant(config: RunConfig, dataset: Dataset, run_dir: Path, variant: str) -> tuple[Path, EvalResult]:
    """Train then evaluate one configuration; returns the checkpoint and its score."""
    trained = train(config, dataset, run_dir)
    result = evaluate(trained.checkpoint, config, dataset)
    write_eval_log(run_dir / "eval_log.csv", result)
    logger.log_action(
        "evaluation_finished",
        variant=variant,
        shots=config.w_shot,
        seed=config.seed,
        accuracy=round(result.mean_accuracy, 2),
        ci95=round(result.ci95, 2),
    )
    return trained.checkpoint, result


def ablate(
    base: RunConfig,
    dataset: Dataset,
    out_dir: Path,
    variants: Sequence[str] = ABLATION_VARIANTS,
    on_run: Optional[Callable[[str, int, int], None]] = None,
) -> AblationResult:
    """
    Run every variant for every ``base.ablation_shots`` x ``base.ablation_seeds``.

    Rows are written in (shots, seed, variant) order to ``out_dir/ablation.csv``.
    """
    out_dir = Path(out_dir)
    unknown = [name for name in variants if name not in VARIANT_SPECS]
    if unknown:
        raise ConfigurationError("Unknown ablation variants", details={"variants": unknown})

    teacher_name = teacher_variant(trir_mode_for(base))
    needs_teacher = any(VARIANT_SPECS[name].trir for name in variants)
    order = list(variants)
    if needs_teacher and teacher_name not in order:
        order.insert(0, teacher_name)

    rows: List[Dict[str, Any]] = []
    for shots in base.ablation_shots:
        for seed in base.ablation_seeds:
            checkpoints: Dict[str, Path] = {}
            # Teachers first so TriR rows find their checkpoint.
            for name in sorted(order, key=lambda n: (VARIANT_SPECS[n].trir, ABLATION_VARIANTS.index(n))):
                spec = VARIANT_SPECS[name]
                config = variant_config(base, name, shots, seed, checkpoints.get(teacher_name) if spec.trir else None)
                run_dir = out_dir / f"w{shots}" / f"s{seed}" / spec.slug
                checkpoint, result = run_variant(config, dataset, run_dir, name)
                checkpoints[name] = checkpoint
                if name in variants:
                    rows.append(
                        {
                            "variant": name,
                            "shots": shots,
                            "seed": seed,
                            "accuracy": result.mean_accuracy,
                            "ci95": result.ci95,
                        }
                    )
                if on_run is not None:
                    on_run(name, shots, seed)

    rank = {name: i for i, name in enumerate(ABLATION_VARIANTS)}
    rows.sort(key=lambda row: (row["shots"], row["seed"], rank[row["variant"]]))
    path = write_rows(out_dir / "ablation.csv", rows, RESULT_COLUMNS)
    return AblationResult(rows, path)


def total_runs(base: RunConfig, variants: Sequence[str] = ABLATION_VARIANTS) -> int:
    extra = 0
    if any(VARIANT_SPECS[name].trir for name in variants) and teacher_variant(trir_mode_for(base)) not in variants:
        extra = 1
    return (len(variants) + extra) * len(base.ablation_shots) * len(base.ablation_seeds)
