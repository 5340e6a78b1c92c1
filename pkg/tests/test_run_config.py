"""
Tests for run configuration, settings and the key=value / CSV utilities.

Covers:
- RunConfig text form: dump/load, unknown and duplicate keys, malformed lines
- Cross-field validation and overrides
- Settings cascade: YAML, environment override, cache reset
- Parsers and formatters
"""

from pathlib import Path

import pytest

from salnet.config.base import AppSettings, LoggingSettings
from salnet.config.config_loader import ConfigLoader
from salnet.config.run_config import Encoding, RunConfig
from salnet.config.settings import settings
from salnet.model.hallucination import PriorMode, Strategy, TrirMode
from salnet.shared.exceptions import ConfigurationError, DataError, UnreadableFileError
from salnet.shared.utils.formatters import format_accuracy, format_csv, format_value
from salnet.shared.utils.parsers import parse_csv, parse_key_value, parse_list

EXAMPLE = Path(__file__).resolve().parents[1] / "config" / "run.example.conf"


# ============================================================================
# RunConfig
# ============================================================================


def test_defaults():
    config = RunConfig()
    assert (config.n_way, config.w_shot) == (5, 1)
    assert config.strategy is Strategy.NONE
    assert config.encoding is Encoding.FGBG
    assert config.n_variants == 2
    assert config.trir.teacher_checkpoint is None


def test_example_file_loads():
    config = RunConfig.load(EXAMPLE)
    assert config.strategy is Strategy.INTER
    assert config.prior.mode is PriorMode.SSP
    assert config.trir.mode is TrirMode.TEACHER_FGBG
    assert config.trir.teacher_checkpoint is None
    assert config.dilation_radii == (1.0, 2.5)
    assert config.encoder.g_layers[1].pool is False


def test_dump_then_load_is_identity(tmp_path):
    config = RunConfig.load(EXAMPLE).with_overrides(**{"trir.beta": 0.1, "prior.alpha": 0.3, "seed": 7})
    path = config.save(tmp_path / "nested" / "config.txt")
    assert RunConfig.load(path) == config
    assert RunConfig.load(path).dump() == config.dump()


def test_flat_keys_follow_declaration_order():
    keys = list(RunConfig().flat())
    assert keys[:3] == ["n_way", "w_shot", "q_train"]
    assert "prior.alpha" in keys and "encoder.f_layers" in keys


@pytest.mark.parametrize(
    "text",
    [
        "n_ways=5",
        "prior.gamma=1",
        "nested.mode=x",
        "prior=ssp",
    ],
)
def test_unknown_keys_rejected(text):
    with pytest.raises(ConfigurationError) as exc:
        RunConfig.from_text(text)
    assert "key" in exc.value.details


def test_duplicate_and_malformed_lines():
    with pytest.raises(ConfigurationError, match="Duplicate"):
        RunConfig.from_text("n_way=5\nn_way=3")
    with pytest.raises(ConfigurationError, match="Malformed"):
        RunConfig.from_text("n_way 5")


@pytest.mark.parametrize(
    "text",
    [
        "n_way=0",
        "prior.tau=1.0",
        "trir.beta=-1",
        "dilation_radii=1.0,-2",
        "dilation_threshold=1.0",
        "encoding=whole_image\nstrategy=inter",
        "encoding=whole_image\ntrir.mode=teacher_fgbg",
        "encoding=whole_image\nprior.mode=hsp",
        "n_way=1\nstrategy=inter",
        "split=0.75,0,0.25\neval_split=val",
        "image_size=8",
        "ablation_shots=",
        "strategy=sideways",
        "encoder.f_layers=4:2:1:1:relu",
    ],
)
def test_invalid_values_rejected(text):
    with pytest.raises(ConfigurationError):
        RunConfig.from_text(text)


def test_comments_and_whitespace():
    config = RunConfig.from_text("# header\n n_way = 3   # trailing\n\nstrategy=intra\n")
    assert config.n_way == 3
    assert config.strategy is Strategy.INTRA


def test_with_overrides():
    base = RunConfig()
    changed = base.with_overrides(**{"w_shot": 5, "trir.beta": 0.5, "prior.mode": "hsp"})
    assert changed.w_shot == 5 and changed.trir.beta == 0.5 and changed.prior.mode is PriorMode.HSP
    assert base.w_shot == 1
    with pytest.raises(ConfigurationError):
        base.with_overrides(**{"trir.gamma": 1})


def test_missing_file():
    with pytest.raises(UnreadableFileError):
        RunConfig.load(Path("does/not/exist.conf"))


def test_config_error_exit_code():
    with pytest.raises(ConfigurationError) as exc:
        RunConfig.from_text("n_way=-1")
    assert exc.value.exit_code == 2


# ============================================================================
# Settings
# ============================================================================


def test_settings_read_environment(monkeypatch):
    monkeypatch.setenv("SALNET_APP_EVAL_WORKERS", "7")
    monkeypatch.setenv("SALNET_LOG_LEVEL", "WARNING")
    ConfigLoader.clear_cache()
    assert settings.app.eval_workers == 7
    assert settings.logging.level == "WARNING"
    assert settings.app.progress is False


def test_settings_are_singletons():
    assert AppSettings.get_instance() is AppSettings.get_instance()
    assert LoggingSettings.get_instance() is settings.logging


def test_yaml_group_loaded(tmp_path, monkeypatch):
    (tmp_path / "app.yaml").write_text("app:\n  pair_chunk: 33\nlogging:\n  format: json\n")
    monkeypatch.setattr(ConfigLoader, "YAML_CONFIG_DIR", tmp_path)
    monkeypatch.setattr(ConfigLoader, "ENVIRONMENT", "nowhere")
    ConfigLoader.clear_cache()
    assert settings.app.pair_chunk == 33
    assert settings.logging.format == "json"


def test_environment_yaml_wins(tmp_path, monkeypatch):
    (tmp_path / "app.yaml").write_text("app:\n  pair_chunk: 33\n")
    (tmp_path / "app.ci.yaml").write_text("app:\n  pair_chunk: 12\n")
    monkeypatch.setattr(ConfigLoader, "YAML_CONFIG_DIR", tmp_path)
    monkeypatch.setattr(ConfigLoader, "ENVIRONMENT", "ci")
    ConfigLoader.clear_cache()
    assert settings.app.pair_chunk == 12


def test_environment_yaml_merges_over_base(tmp_path, monkeypatch):
    (tmp_path / "app.yaml").write_text("app:\n  pair_chunk: 33\n  eval_workers: 3\n")
    (tmp_path / "app.ci.yaml").write_text("app:\n  pair_chunk: 12\n")
    monkeypatch.setattr(ConfigLoader, "YAML_CONFIG_DIR", tmp_path)
    monkeypatch.setattr(ConfigLoader, "ENVIRONMENT", "ci")
    ConfigLoader.clear_cache()
    assert settings.app.pair_chunk == 12
    assert settings.app.eval_workers == 3


# ============================================================================
# Parsers and formatters
# ============================================================================


def test_parse_key_value():
    assert parse_key_value("a=1\n# c\nb = x=y") == {"a": "1", "b": "x=y"}
    with pytest.raises(ConfigurationError):
        parse_key_value("=1")


def test_parse_list():
    assert parse_list(" 1, 2 ,,3 ") == ["1", "2", "3"]
    assert parse_list("") == []


def test_format_value_round_trips_floats():
    for value in (0.1, 1e-3, 1 / 3, 2.5e10):
        assert float(format_value(value)) == value
    assert format_value(None) == ""
    assert format_value(True) == "true"
    assert format_value(Strategy.INTER) == "inter"
    assert format_value((1, 5)) == "1,5"


def test_csv_round_trip():
    text = format_csv([{"variant": "Inter.-Hal.+TriR", "shots": 5, "accuracy": 61.25}], ["variant", "shots", "accuracy"])
    assert parse_csv(text, required=("variant",)) == [{"variant": "Inter.-Hal.+TriR", "shots": "5", "accuracy": "61.25"}]


def test_csv_errors():
    with pytest.raises(DataError):
        parse_csv("")
    with pytest.raises(DataError):
        parse_csv("a,b\n1,2", required=("c",))
    with pytest.raises(DataError):
        parse_csv("a,b\n1,2,3")


def test_format_accuracy():
    assert format_accuracy(57.4512, 0.8791) == "57.45 ± 0.88"
