"""Training, evaluation, ablation and plotting."""

from salnet.harness.ablation import AblationResult, VARIANT_SPECS, ablate, variant_config
from salnet.harness.evaluator import evaluate, evaluate_parameters, write_eval_log
from salnet.harness.metrics import EvalResult, ci95, read_rows, write_rows
from salnet.harness.plots import emit_plots
from salnet.harness.sweeps import sweep
from salnet.harness.trainer import TrainResult, Trainer, ensure_teacher, teacher_config, train

__all__ = [
    "AblationResult",
    "VARIANT_SPECS",
    "ablate",
    "variant_config",
    "evaluate",
    "evaluate_parameters",
    "write_eval_log",
    "EvalResult",
    "ci95",
    "read_rows",
    "write_rows",
    "emit_plots",
    "sweep",
    "TrainResult",
    "Trainer",
    "ensure_teacher",
    "teacher_config",
    "train",
]
