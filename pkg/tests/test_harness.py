"""
Tests for training artifacts, evaluation, ablation, sweeps and plots.

Covers:
- Run directory artifacts and teacher bootstrap
- Evaluation determinism, worker independence, 1-way sanity, confidence interval
- Ablation rows, layout and teacher reuse
- Sweeps and the plots drawn from their logs
"""

import math

import pytest

from salnet.config.constants import ABLATION_VARIANTS, RESULT_COLUMNS, TRAIN_LOG_COLUMNS
from salnet.config.run_config import Encoding
from salnet.harness import (
    VARIANT_SPECS,
    EvalResult,
    ablate,
    ci95,
    emit_plots,
    ensure_teacher,
    evaluate,
    evaluate_parameters,
    read_rows,
    sweep,
    teacher_config,
    train,
    variant_config,
    write_eval_log,
    write_rows,
)
from salnet.harness.ablation import total_runs
from salnet.model.hallucination import PriorMode, Strategy, TrirMode
from salnet.model.network import SalNet
from salnet.shared.exceptions import ConfigurationError, DataError, InsufficientDataError, UnreadableFileError


def _files(directory):
    return sorted(p.name for p in directory.iterdir()) if directory.exists() else []


# ============================================================================
# Training artifacts
# ============================================================================


def test_train_writes_artifacts(tiny_config, tiny_dataset, tmp_path):
    seen = []
    result = train(tiny_config, tiny_dataset, tmp_path / "run", on_episode=seen.append)
    assert seen == list(range(tiny_config.episodes_train))
    assert _files(tmp_path / "run") == ["config.txt", "model.ckpt", "train_log.csv"]
    rows = read_rows(result.log_path, TRAIN_LOG_COLUMNS)
    assert [int(r["episode"]) for r in rows] == list(range(tiny_config.episodes_train))
    assert result.config_path.read_text() == tiny_config.dump()
    assert all(math.isfinite(v) for v in result.losses)


def test_teacher_config_variants(tiny_config):
    fgbg = teacher_config(tiny_config.with_overrides(**{"strategy": "inter", "trir.mode": "teacher_fgbg", "prior.mode": "ssp"}))
    assert fgbg.encoding is Encoding.FGBG
    assert fgbg.strategy is Strategy.NONE and fgbg.prior.mode is PriorMode.NONE
    assert fgbg.trir.mode is TrirMode.OFF
    full = teacher_config(tiny_config.with_overrides(**{"trir.mode": "teacher_full_image"}))
    assert full.encoding is Encoding.WHOLE_IMAGE


def test_ensure_teacher_trains_once(tiny_config, tiny_dataset, tmp_path):
    config = tiny_config.with_overrides(**{"trir.mode": "teacher_fgbg"})
    ready = ensure_teacher(config, tiny_dataset, tmp_path)
    assert ready.trir.teacher_checkpoint == tmp_path / "teacher" / "model.ckpt"
    before = ready.trir.teacher_checkpoint.read_bytes()
    assert ensure_teacher(ready, tiny_dataset, tmp_path) is ready
    train(ready, tiny_dataset, tmp_path / "student")
    assert ready.trir.teacher_checkpoint.read_bytes() == before
    assert ensure_teacher(tiny_config, tiny_dataset, tmp_path) is tiny_config


# ============================================================================
# Evaluation
# ============================================================================


def test_evaluation_is_deterministic_and_leaves_checkpoint_alone(tiny_config, tiny_dataset, tmp_path):
    checkpoint = train(tiny_config, tiny_dataset, tmp_path / "run").checkpoint
    before = checkpoint.read_bytes()
    first = evaluate(checkpoint, tiny_config, tiny_dataset, workers=1)
    second = evaluate(checkpoint, tiny_config, tiny_dataset, workers=1)
    assert first == second
    assert checkpoint.read_bytes() == before
    assert len(first.per_episode) == tiny_config.episodes_eval
    assert all(0.0 <= a <= 100.0 for a in first.per_episode)


def test_worker_count_does_not_change_results(tiny_config, tiny_dataset):
    params = SalNet(tiny_config.encoder, tiny_config.relation, seed=5).snapshot()
    config = tiny_config.with_overrides(strategy="inter")
    single = evaluate_parameters(params, config, tiny_dataset, workers=1, pair_chunk=3)
    pooled = evaluate_parameters(params, config, tiny_dataset, workers=4, pair_chunk=64)
    assert single.per_episode == pooled.per_episode


def test_one_way_is_always_right(tiny_config, tiny_dataset):
    config = tiny_config.with_overrides(n_way=1)
    params = SalNet(config.encoder, config.relation).snapshot()
    result = evaluate_parameters(params, config, tiny_dataset, workers=2)
    assert result.mean_accuracy == 100.0
    assert result.ci95 == 0.0


def test_undersized_split_fails_fast(tiny_config, tiny_dataset):
    config = tiny_config.with_overrides(n_way=5)
    params = SalNet(config.encoder, config.relation).snapshot()
    with pytest.raises(InsufficientDataError):
        evaluate_parameters(params, config, tiny_dataset)


def test_missing_checkpoint(tiny_config, tiny_dataset, tmp_path):
    with pytest.raises(UnreadableFileError):
        evaluate(tmp_path / "nope.ckpt", tiny_config, tiny_dataset)


def test_ci95_matches_definition(rng):
    values = rng.uniform(0, 100, size=37)
    mean = sum(values) / len(values)
    std = math.sqrt(sum((v - mean) ** 2 for v in values) / (len(values) - 1))
    assert ci95(values) == pytest.approx(1.96 * std / math.sqrt(len(values)))
    assert ci95([42.0]) == 0.0


def test_eval_result_in_percent(tmp_path):
    result = EvalResult.from_episodes([1.0, 0.5, 0.0])
    assert result.mean_accuracy == pytest.approx(50.0)
    assert str(result) == f"50.00 ± {result.ci95:.2f}"
    rows = read_rows(write_eval_log(tmp_path / "eval_log.csv", result))
    assert [float(r["accuracy"]) for r in rows] == [100.0, 50.0, 0.0]


# ============================================================================
# Ablation
# ============================================================================


def test_variant_configs(tiny_config, tmp_path):
    teacher = tmp_path / "t.ckpt"
    ssp = variant_config(tiny_config, "Inter.-Hal.+TriR+SSP", 5, 3, teacher)
    assert (ssp.w_shot, ssp.seed) == (5, 3)
    assert ssp.strategy is Strategy.INTER and ssp.prior.mode is PriorMode.SSP
    assert ssp.trir.mode is TrirMode.TEACHER_FGBG and ssp.trir.teacher_checkpoint == teacher
    plain = variant_config(tiny_config, "Intra.-Hal.", 5, 3, teacher)
    assert plain.trir.mode is TrirMode.OFF and plain.trir.teacher_checkpoint is None
    baseline = variant_config(tiny_config, "w/o Sal. Seg.", 1, 0)
    assert baseline.encoding is Encoding.WHOLE_IMAGE
    assert list(VARIANT_SPECS) == list(ABLATION_VARIANTS)


def test_ablation_runs_every_variant(tiny_config, tiny_dataset, tmp_path):
    teacher_bytes = {}

    def on_run(name, shots, seed):
        if name == "w/o Hal.":
            teacher_bytes["before"] = (tmp_path / f"w{shots}" / f"s{seed}" / "wo_hal" / "model.ckpt").read_bytes()

    result = ablate(tiny_config, tiny_dataset, tmp_path, on_run=on_run)
    assert [row["variant"] for row in result.rows] == list(ABLATION_VARIANTS)
    assert all(row["shots"] == 1 and row["seed"] == 0 for row in result.rows)
    assert (tmp_path / "w1" / "s0" / "wo_hal" / "model.ckpt").read_bytes() == teacher_bytes["before"]

    for spec in VARIANT_SPECS.values():
        run_dir = tmp_path / "w1" / "s0" / spec.slug
        assert _files(run_dir) == ["config.txt", "eval_log.csv", "model.ckpt", "train_log.csv"]
    trir_config = (tmp_path / "w1" / "s0" / "inter_trir_ssp" / "config.txt").read_text()
    assert "wo_hal" in trir_config

    csv_rows = read_rows(result.path, RESULT_COLUMNS)
    assert len(csv_rows) == 8
    assert result.table().row_count == len(ABLATION_VARIANTS)


def test_ablation_subset_adds_teacher_run(tiny_config, tiny_dataset, tmp_path):
    runs = []
    result = ablate(tiny_config, tiny_dataset, tmp_path, variants=["Inter.-Hal.+TriR"], on_run=lambda *a: runs.append(a[0]))
    assert runs == ["w/o Hal.", "Inter.-Hal.+TriR"]
    assert [row["variant"] for row in result.rows] == ["Inter.-Hal.+TriR"]
    assert total_runs(tiny_config, ["Inter.-Hal.+TriR"]) == 2
    assert total_runs(tiny_config) == 8


def test_ablation_rejects_unknown_variant(tiny_config, tiny_dataset, tmp_path):
    with pytest.raises(ConfigurationError):
        ablate(tiny_config, tiny_dataset, tmp_path, variants=["Inter.-Hal.+Magic"])


# ============================================================================
# Sweeps and plots
# ============================================================================


BETAS = [0.0, 0.005, 0.01, 0.1, 0.5]


def test_beta_sweep_and_plot(tiny_config, tiny_dataset, tmp_path):
    config = tiny_config.with_overrides(**{"strategy": "inter", "trir.mode": "teacher_fgbg"})
    rows = sweep(config, tiny_dataset, "trir.beta", BETAS, tmp_path / "sweep")
    assert [row["variant"] for row in rows] == [f"trir.beta={b!r}" for b in BETAS]
    teachers = list((tmp_path / "sweep").glob("*/s0/teacher/model.ckpt"))
    assert len(teachers) == 1

    written = emit_plots([tmp_path / "sweep" / "sweep.csv"], tmp_path / "plots")
    assert sorted(p.name for p in written) == ["sweep_trir_beta.csv", "sweep_trir_beta.svg"]
    points = read_rows(tmp_path / "plots" / "sweep_trir_beta.csv", RESULT_COLUMNS)
    assert len(points) == len(BETAS)


def test_sweep_validation(tiny_config, tiny_dataset, tmp_path):
    with pytest.raises(ConfigurationError):
        sweep(tiny_config, tiny_dataset, "trir.gamma", [1], tmp_path)
    with pytest.raises(ConfigurationError):
        sweep(tiny_config, tiny_dataset, "trir.beta", [], tmp_path)


def test_image_size_sweep_resizes_data(tiny_config, tiny_dataset, tmp_path):
    rows = sweep(tiny_config, tiny_dataset, "image_size", [16, 24], tmp_path)
    assert [row["variant"] for row in rows] == ["image_size=16", "image_size=24"]


def _result_log(path, rows):
    return write_rows(path, rows, RESULT_COLUMNS)


def test_plots_average_seeds_and_draw_ablation(tmp_path):
    log = _result_log(
        tmp_path / "ablation.csv",
        [
            {"variant": "w/o Hal.", "shots": 1, "seed": 0, "accuracy": 40.0, "ci95": 2.0},
            {"variant": "w/o Hal.", "shots": 1, "seed": 1, "accuracy": 50.0, "ci95": 4.0},
            {"variant": "Inter.-Hal.", "shots": 1, "seed": 0, "accuracy": 55.0, "ci95": 1.0},
        ],
    )
    written = emit_plots([log], tmp_path / "out")
    assert sorted(p.name for p in written) == ["ablation.csv", "ablation.svg"]
    merged = read_rows(tmp_path / "out" / "ablation.csv")
    assert float(merged[0]["accuracy"]) == 45.0 and float(merged[0]["ci95"]) == 3.0


def test_training_plot_is_reproducible(tmp_path):
    rows = [
        {"episode": i, "loss": 1.0 / (i + 1), "omega": 0.0, "loss_total": 1.0 / (i + 1), "accuracy": 0.5}
        for i in range(120)
    ]
    log = write_rows(tmp_path / "wo_hal" / "train_log.csv", rows, TRAIN_LOG_COLUMNS)
    first = emit_plots([log], tmp_path / "a")
    second = emit_plots([log], tmp_path / "b")
    assert [p.name for p in first] == ["loss_wo_hal_train_log.svg", "loss_wo_hal_train_log.csv"]
    assert first[0].read_bytes() == second[0].read_bytes()


def test_bad_logs_write_nothing(tmp_path):
    good = _result_log(tmp_path / "good.csv", [{"variant": "w/o Hal.", "shots": 1, "seed": 0, "accuracy": 1, "ci95": 0}])
    empty = tmp_path / "empty.csv"
    empty.write_text("variant,shots,seed,accuracy,ci95\n")
    out = tmp_path / "out"
    with pytest.raises(DataError):
        emit_plots([good, empty], out)
    assert _files(out) == []

    odd = tmp_path / "odd.csv"
    odd.write_text("foo,bar\n1,2\n")
    with pytest.raises(DataError):
        emit_plots([odd], out)
    with pytest.raises(DataError):
        emit_plots([], out)
    assert _files(out) == []


def test_non_numeric_training_log_rejected(tmp_path):
    log = tmp_path / "train_log.csv"
    log.write_text("episode,loss,omega,loss_total,accuracy\n0,nan?,0,0,0\n")
    with pytest.raises(DataError):
        emit_plots([log], tmp_path / "out")
    assert _files(tmp_path / "out") == []


def test_missing_log_is_unreadable(tmp_path):
    with pytest.raises(UnreadableFileError):
        emit_plots([tmp_path / "missing.csv"], tmp_path / "out")
