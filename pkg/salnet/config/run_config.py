"""
Experiment configuration.

A run is described by a flat ``key=value`` file: one key per line, ``#``
comments, nested groups addressed with dotted keys::

    n_way=5
    w_shot=1
    strategy=inter
    prior.mode=ssp
    prior.alpha=1.0
    trir.mode=teacher_fgbg
    encoder.f_layers=32:3:1:1:relu,32:3:1:1:relu
    dilation_radii=1.0,2.5

Unknown keys, malformed lines, duplicates and out-of-range values raise
``ConfigurationError``. ``RunConfig.dump`` writes the same format back.
"""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, Literal, Mapping, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from salnet.config.constants import DEFAULT_DILATION_RADII, DEFAULT_DILATION_THRESHOLD
from salnet.model.femn import EncoderConfig
from salnet.model.hallucination import PriorConfig, PriorMode, Strategy, TrirConfig, TrirMode
from salnet.model.layers import format_layers
from salnet.model.relation import RelationConfig
from salnet.saliency.masks import SaliencyBackend
from salnet.shared.exceptions import ConfigurationError, UnreadableFileError
from salnet.shared.utils.formatters import format_key_value, format_value
from salnet.shared.utils.parsers import parse_key_value, parse_list


class Encoding(str, Enum):
    FGBG = "fgbg"
    WHOLE_IMAGE = "whole_image"


NESTED_GROUPS: Dict[str, type[BaseModel]] = {
    "prior": PriorConfig,
    "trir": TrirConfig,
    "encoder": EncoderConfig,
    "relation": RelationConfig,
}


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    n_way: int = Field(default=5, ge=1)
    w_shot: int = Field(default=1, ge=1)
    q_train: int = Field(default=5, ge=1)
    q_test: int = Field(default=3, ge=1)
    episodes_train: int = Field(default=2000, ge=1)
    episodes_eval: int = Field(default=300, ge=1)
    lr: float = Field(default=1e-3, gt=0.0)
    strategy: Strategy = Strategy.NONE
    encoding: Encoding = Encoding.FGBG
    prior: PriorConfig = Field(default_factory=PriorConfig)
    trir: TrirConfig = Field(default_factory=TrirConfig)
    saliency_backend: SaliencyBackend = SaliencyBackend.ORACLE
    dilation_radii: Tuple[float, ...] = DEFAULT_DILATION_RADII
    dilation_threshold: float = Field(default=DEFAULT_DILATION_THRESHOLD, gt=0.0, lt=1.0)
    encoder: EncoderConfig = Field(default_factory=EncoderConfig)
    relation: RelationConfig = Field(default_factory=RelationConfig)
    image_size: int = Field(default=32, ge=8)
    seed: int = 0
    split: Tuple[float, float, float] = (0.6, 0.15, 0.25)
    eval_split: Literal["test", "val"] = "test"
    log_every: int = Field(default=100, ge=1)
    ablation_shots: Tuple[int, ...] = (1, 5)
    ablation_seeds: Tuple[int, ...] = (0,)

    @field_validator("dilation_radii", "split", "ablation_shots", "ablation_seeds", mode="before")
    @classmethod
    def _split_lists(cls, value: Any) -> Any:
        if isinstance(value, str):
            return tuple(parse_list(value))
        return value

    @field_validator("dilation_radii")
    @classmethod
    def _non_negative_radii(cls, value: Tuple[float, ...]) -> Tuple[float, ...]:
        if any(r < 0 for r in value):
            raise ValueError("dilation radii must be >= 0")
        return value

    @field_validator("ablation_shots")
    @classmethod
    def _positive_shots(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if not value or any(w < 1 for w in value):
            raise ValueError("ablation_shots must be a non-empty list of positive integers")
        return value

    @field_validator("ablation_seeds")
    @classmethod
    def _some_seeds(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if not value:
            raise ValueError("ablation_seeds must not be empty")
        return value

    @model_validator(mode="after")
    def _check_combination(self) -> "RunConfig":
        if self.encoding is Encoding.WHOLE_IMAGE:
            if self.strategy is not Strategy.NONE or self.trir.mode is not TrirMode.OFF:
                raise ValueError("encoding=whole_image requires strategy=none and trir.mode=off")
            if self.prior.mode is not PriorMode.NONE:
                raise ValueError("encoding=whole_image has no hallucinated pairs to weight")
        if self.strategy is Strategy.INTER and self.n_way < 2:
            raise ValueError("strategy=inter needs n_way >= 2")
        if self.eval_split == "val" and self.split[1] <= 0:
            raise ValueError("eval_split=val needs a positive validation ratio")
        self.encoder.check(self.image_size)
        return self

    @property
    def n_variants(self) -> int:
        """Background variants per support; raw backgrounds count as one."""
        return max(1, len(self.dilation_radii))

    # ------------------------------------------------------------------
    # flat key=value form
    # ------------------------------------------------------------------

    def flat(self) -> Dict[str, Any]:
        """Dotted-key view of every field, in declaration order."""
        values: Dict[str, Any] = {}
        for name in type(self).model_fields:
            value = getattr(self, name)
            if name in NESTED_GROUPS:
                for sub in type(value).model_fields:
                    sub_value = getattr(value, sub)
                    if sub in ("f_layers", "g_layers"):
                        sub_value = format_layers(sub_value)
                    values[f"{name}.{sub}"] = sub_value
            else:
                values[name] = value
        return values

    def dump(self) -> str:
        return format_key_value(self.flat())

    def save(self, path: Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.dump(), encoding="utf-8")
        return path

    @classmethod
    def from_flat(cls, values: Mapping[str, Any], source: str = "<mapping>") -> "RunConfig":
        """
        Build a config from dotted keys.

        Raises:
            ConfigurationError: unknown key or invalid value
        """
        nested: Dict[str, Any] = {}
        for key, value in values.items():
            group, dot, sub = key.partition(".")
            if dot:
                if group not in NESTED_GROUPS or sub not in NESTED_GROUPS[group].model_fields:
                    raise ConfigurationError("Unknown config key", details={"source": source, "key": key})
                if sub == "teacher_checkpoint" and value == "":
                    value = None
                nested.setdefault(group, {})[sub] = value
            else:
                if key not in cls.model_fields or key in NESTED_GROUPS:
                    raise ConfigurationError("Unknown config key", details={"source": source, "key": key})
                nested[key] = value
        try:
            return cls(**nested)
        except ValidationError as e:
            raise ConfigurationError(
                "Invalid run configuration",
                details={
                    "source": source,
                    "errors": [f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors()],
                },
                original_error=e,
            ) from e

    @classmethod
    def from_text(cls, text: str, source: str = "<string>") -> "RunConfig":
        return cls.from_flat(parse_key_value(text, source), source)

    @classmethod
    def load(cls, path: Path) -> "RunConfig":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise UnreadableFileError("Cannot read run config", path=str(path), original_error=e) from e
        return cls.from_text(text, str(path))

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        """Copy with dotted-key overrides, e.g. ``with_overrides(**{"trir.beta": 0.1})``."""
        values = {key: format_value(value) for key, value in self.flat().items()}
        for key, value in overrides.items():
            if key not in values:
                raise ConfigurationError("Unknown config key", details={"key": key})
            values[key] = value if isinstance(value, str) else format_value(value)
        return RunConfig.from_flat(values)


__all__ = ["RunConfig", "Encoding"]
