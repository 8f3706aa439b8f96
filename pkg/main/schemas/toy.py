import math

from pydantic import Field, field_validator, model_validator

from main.commons.exceptions import DomainError
from main.enums import HeadVariant, PriorInit

from .base import BaseResponseSchema, BaseValidationSchema, DomainModel, FloatArray
from .prior import GoatHeadConfig


class ToyTaskSpec(DomainModel):
    vocab_size: int = Field(default=32, ge=2)
    seq_len: int = Field(default=64, ge=2)
    p_global: float = 0.45
    p_local: float = 0.45
    p_noise: float = 0.1
    seed: int = 0

    @model_validator(mode="after")
    def _mixture_probabilities(self) -> "ToyTaskSpec":
        probabilities = (self.p_global, self.p_local, self.p_noise)
        if any(p < 0 or p > 1 for p in probabilities) or not math.isclose(
            sum(probabilities),
            1.0,
            abs_tol=1e-9,
        ):
            raise DomainError(
                "Mixture probabilities must be in [0, 1] and sum to one",
                error_data={
                    "p_global": self.p_global,
                    "p_local": self.p_local,
                    "p_noise": self.p_noise,
                },
            )
        return self


class OptimizerConfig(BaseValidationSchema):
    learning_rate: float = Field(default=3e-3, gt=0)
    beta1: float = 0.9
    beta2: float = 0.95
    eps: float = 1e-8
    weight_decay: float = 0.1
    clip_norm: float = Field(default=1.0, gt=0)
    warmup_steps: int = Field(default=100, ge=0)
    # cosine decay ends at this fraction of the peak learning rate
    min_lr_ratio: float = Field(default=0.1, ge=0, le=1)
    batch_size: int = Field(default=32, ge=1)


class ToyModelConfig(DomainModel):
    layers: int = Field(default=2, ge=1)
    heads: int = Field(default=2, ge=1)
    d_model: int = 64
    head: GoatHeadConfig = GoatHeadConfig(d_h=32, R=4)
    vocab_size: int = Field(default=32, ge=2)
    variant: HeadVariant = HeadVariant.GOAT
    prior_init: PriorInit = PriorInit.UNIFORM
    # decay per position of lag used by the recency initialisation
    recency_decay: float = 0.05
    sink_hidden: int = Field(default=16, ge=0)
    sink_features: int = 8
    # sink MLP length normalisation; the training context length
    l_ref: int = Field(default=64, gt=0)
    # table size of the learned absolute position baseline
    max_positions: int = Field(default=512, gt=0)
    omega_min: float | None = None
    omega_max: float | None = None
    optimizer: OptimizerConfig = OptimizerConfig()
    seed: int = 0

    @field_validator("sink_features")
    @classmethod
    def _even_sink_features(cls, sink_features: int) -> int:
        if sink_features < 0 or sink_features % 2:
            raise DomainError(
                "sink_features must be a non-negative even number",
                error_data={"sink_features": sink_features},
            )
        return sink_features

    @model_validator(mode="after")
    def _head_split(self) -> "ToyModelConfig":
        if self.d_model != self.heads * self.head.d_h:
            raise DomainError(
                "d_model must equal heads * d_h",
                error_data={
                    "d_model": self.d_model,
                    "heads": self.heads,
                    "d_h": self.head.d_h,
                },
            )
        return self


class PriorDecomposition(DomainModel):
    sink: FloatArray
    k_sink: FloatArray
    k_rel: FloatArray
    k_total_centered: FloatArray
    induced_prior: FloatArray


class ExtrapolationPoint(BaseResponseSchema):
    length: int
    accuracy: float
    copy_accuracy: float
    copy_hit_rate: float


class GradCheckReport(BaseResponseSchema):
    seed: int
    entries: int
    max_relative_error: float
    worst_parameter: str
    per_parameter: dict[str, float]


class ParameterArray(BaseValidationSchema):
    shape: list[int]
    values: list[float]


class CheckpointDocument(BaseValidationSchema):
    step: int
    config: ToyModelConfig
    task: ToyTaskSpec | None = None
    parameters: dict[str, ParameterArray]
