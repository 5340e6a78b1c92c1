"""
Learning-signal checks on the synthetic corpus.

Covers:
- The baseline loss curve goes down within 500 episodes
- An untrained model scores at chance level
- A TriR run with beta=0.01 keeps a finite, falling loss
- On the default corpus the baseline beats chance and Inter.-Hal.+TriR+SSP
  matches or beats it in most seeds
"""

import numpy as np
import pytest

from salnet.config.run_config import RunConfig
from salnet.data.synthetic import generate_synthetic, synthetic_config
from salnet.harness.ablation import FGBG_BASELINE, run_variant, variant_config
from salnet.harness.evaluator import evaluate_parameters
from salnet.harness.trainer import ensure_teacher, train
from salnet.model.network import SalNet

from conftest import TINY_ENCODER

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def corpus():
    return generate_synthetic(synthetic_config(num_classes=20, images_per_class=12, image_size=16, seed=0))


def _config(**overrides) -> RunConfig:
    values = {"image_size": 16, "n_way": 5, "w_shot": 1, "q_train": 3, "q_test": 3, **TINY_ENCODER, **overrides}
    return RunConfig.from_flat({key: str(value) for key, value in values.items()})


@pytest.mark.parametrize("seed", [0, 1])
def test_baseline_loss_decreases(corpus, tmp_path, seed):
    config = _config(episodes_train=500, seed=seed, log_every=100)
    losses = np.array(train(config, corpus, tmp_path / "run").losses)
    assert losses[-100:].mean() < losses[:100].mean()


def test_untrained_model_is_at_chance(corpus):
    config = _config(episodes_eval=200)
    accuracies = []
    for seed in range(5):
        params = SalNet(config.encoder, config.relation, seed=seed).snapshot()
        result = evaluate_parameters(params, config.with_overrides(seed=seed), corpus, workers=4)
        accuracies.extend(result.per_episode)
    assert abs(np.mean(accuracies) - 20.0) <= 5.0


def test_trir_run_converges(corpus, tmp_path):
    config = _config(episodes_train=500, log_every=100, strategy="inter", **{"trir.mode": "teacher_fgbg", "trir.beta": 0.01})
    config = ensure_teacher(config, corpus, tmp_path / "run")
    losses = np.array(train(config, corpus, tmp_path / "run").losses)
    assert np.isfinite(losses).all()
    assert losses[-100:].mean() < losses[:100].mean()


@pytest.fixture(scope="module")
def default_corpus():
    return generate_synthetic(synthetic_config(seed=0))


def test_full_method_against_baseline(default_corpus, tmp_path):
    base = RunConfig()
    baseline_scores, full_scores = [], []
    for seed in range(5):
        baseline = variant_config(base, FGBG_BASELINE, shots=1, seed=seed)
        checkpoint, result = run_variant(baseline, default_corpus, tmp_path / f"wo_hal_{seed}", FGBG_BASELINE)
        baseline_scores.append(result.mean_accuracy)
        # the baseline run is the fg/bg teacher for the same seed
        full = variant_config(base, "Inter.-Hal.+TriR+SSP", shots=1, seed=seed, teacher_checkpoint=checkpoint)
        _, result = run_variant(full, default_corpus, tmp_path / f"full_{seed}", "Inter.-Hal.+TriR+SSP")
        full_scores.append(result.mean_accuracy)

    assert np.mean(baseline_scores) >= 35.0
    assert sum(f >= b for f, b in zip(full_scores, baseline_scores)) >= 4
