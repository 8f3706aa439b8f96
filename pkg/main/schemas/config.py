from pathlib import Path
from typing import Annotated, Any, TypeVar

import pydantic
from pydantic import BeforeValidator, Field, model_validator

from main._config import config
from main.commons.exceptions import ConfigError, validation_details
from main.enums import HeadVariant, PriorInit, Suite

from .base import BaseValidationSchema
from .prior import GoatHeadConfig
from .toy import OptimizerConfig, ToyModelConfig, ToyTaskSpec


def _split_commas(value: Any) -> Any:
    if isinstance(value, str):
        return [item.strip() for item in value.split(",") if item.strip()]
    return value


# accepts "a, b, c" from config files as well as real lists from flags
CommaList = BeforeValidator(_split_commas)


class RunConfig(BaseValidationSchema):
    seed: int = 0
    output_dir: Path = Field(default_factory=lambda: Path(config.GOAT_OUTPUT_DIR))


class VerifyConfig(RunConfig):
    suite: Annotated[list[Suite], CommaList] = Field(
        default_factory=lambda: list(Suite),
    )
    gradcheck_seeds: int = Field(default=5, ge=1)


class TrainToyConfig(RunConfig):
    vocab_size: int = 32
    seq_len: int = 64
    p_global: float = 0.45
    p_local: float = 0.45
    p_noise: float = 0.1
    layers: int = 2
    heads: int = 2
    d_model: int = 64
    d_h: int = 32
    R: int = 4
    variant: HeadVariant = HeadVariant.GOAT
    prior_init: PriorInit = PriorInit.UNIFORM
    steps: int = Field(default=3000, ge=1)
    batch_size: int = Field(default=32, ge=1)
    learning_rate: float = Field(default=3e-3, gt=0)
    warmup_steps: int = Field(default=100, ge=0)
    eval_lengths: Annotated[list[int], CommaList] = Field(
        default_factory=lambda: [64, 128, 256],
    )
    eval_sequences: int = Field(default=128, ge=1)
    checkpoint_every: int = Field(default=0, ge=0)

    @model_validator(mode="before")
    @classmethod
    def _default_eval_lengths(cls, data: Any) -> Any:
        """Unset evaluation lengths follow the training length: L, 2L and 4L."""
        if not isinstance(data, dict) or data.get("eval_lengths") is not None:
            return data
        try:
            seq_len = int(data.get("seq_len", cls.model_fields["seq_len"].default))
        except (TypeError, ValueError):
            return data
        return {**data, "eval_lengths": [seq_len, 2 * seq_len, 4 * seq_len]}

    @model_validator(mode="after")
    def _eval_lengths_cover_training(self) -> "TrainToyConfig":
        short = [length for length in self.eval_lengths if length < self.seq_len]
        if short or not self.eval_lengths:
            raise ConfigError(
                "Evaluation lengths must be given and at least the training length",
                error_data={"lengths": short, "seq_len": self.seq_len},
            )
        return self

    def task_spec(self) -> ToyTaskSpec:
        return ToyTaskSpec(
            vocab_size=self.vocab_size,
            seq_len=self.seq_len,
            p_global=self.p_global,
            p_local=self.p_local,
            p_noise=self.p_noise,
            seed=self.seed,
        )

    def toy_model_config(self) -> ToyModelConfig:
        return ToyModelConfig(
            layers=self.layers,
            heads=self.heads,
            d_model=self.d_model,
            head=GoatHeadConfig(d_h=self.d_h, R=self.R),
            vocab_size=self.vocab_size,
            variant=self.variant,
            prior_init=self.prior_init,
            l_ref=self.seq_len,
            max_positions=max([8 * self.seq_len, *self.eval_lengths]),
            optimizer=OptimizerConfig(
                learning_rate=self.learning_rate,
                warmup_steps=self.warmup_steps,
                batch_size=self.batch_size,
            ),
            seed=self.seed,
        )


class DumpPriorConfig(RunConfig):
    checkpoint: Path
    head: int = Field(default=0, ge=0)
    layer: int = Field(default=0, ge=0)
    length: int = Field(default=64, ge=1)


class BenchConfig(RunConfig):
    lengths: Annotated[list[int], CommaList] = Field(
        default_factory=lambda: [256, 512, 1024, 2048, 4096],
    )
    d_h: int = 64
    R: int = 8
    repeats: int = Field(default=3, ge=1)


RunConfigT = TypeVar("RunConfigT", bound=RunConfig)


def read_config_file(path: Path) -> dict[str, str]:
    """`key = value` lines; `#` starts a comment, blank lines are skipped."""
    if not path.is_file():
        raise ConfigError("Config file not found", error_data={"path": str(path)})
    values = {}
    for number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, separator, value = line.partition("=")
        if not separator or not key.strip():
            raise ConfigError(
                "Config lines must look like key = value",
                error_data={"path": str(path), "line": number},
            )
        values[key.strip()] = value.strip()
    return values


def load_run_config(
    model: type[RunConfigT],
    path: Path | None = None,
    overrides: dict[str, Any] | None = None,
) -> RunConfigT:
    """Defaults, then the config file, then flags (None means not given)."""
    values: dict[str, Any] = read_config_file(path) if path else {}
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return model.model_validate(values)
    except pydantic.ValidationError as e:
        raise ConfigError(error_data=validation_details(e)) from e
