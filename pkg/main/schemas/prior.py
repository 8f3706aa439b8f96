import numpy as np
from pydantic import ConfigDict, Field, computed_field, field_validator, model_validator

from main.commons.exceptions import DomainError

from .base import BaseValidationSchema, DomainModel, FloatArray


DEFAULT_SINK_HIDDEN = 16
DEFAULT_SINK_FEATURES = 8


class SpectralPriorParams(DomainModel):
    """Frequencies and spectral weights of the relative log-prior."""

    frequencies: FloatArray
    alpha: FloatArray
    beta: FloatArray

    @field_validator("frequencies")
    @classmethod
    def _increasing_frequencies(cls, frequencies: np.ndarray) -> np.ndarray:
        if frequencies.ndim != 1:
            raise DomainError("Frequencies must be a 1-D array")
        if np.any(frequencies <= 0) or np.any(np.diff(frequencies) <= 0):
            raise DomainError(
                "Frequencies must be positive and strictly increasing",
                error_data={"frequencies": frequencies.tolist()},
            )
        return frequencies

    @model_validator(mode="after")
    def _matching_lengths(self) -> "SpectralPriorParams":
        size = self.frequencies.size
        if self.alpha.shape != (size,) or self.beta.shape != (size,):
            raise DomainError(
                "alpha and beta must have one weight per frequency",
                error_data={
                    "R": size,
                    "alpha": list(self.alpha.shape),
                    "beta": list(self.beta.shape),
                },
            )
        if not (np.all(np.isfinite(self.alpha)) and np.all(np.isfinite(self.beta))):
            raise DomainError("Spectral weights must be finite")
        return self

    @property
    def rank(self) -> int:
        return int(self.frequencies.size)

    @classmethod
    def zeros(cls, frequencies) -> "SpectralPriorParams":
        size = len(frequencies)
        return cls(frequencies=frequencies, alpha=np.zeros(size), beta=np.zeros(size))


class SinkBiasParams(DomainModel):
    """Key-only bias u(j) = slope * j / l_ref + MLP(features(j))."""

    slope: float = 0.0
    mlp_w1: FloatArray
    mlp_b1: FloatArray
    mlp_w2: FloatArray
    mlp_b2: float = 0.0
    feature_count: int = DEFAULT_SINK_FEATURES
    l_ref: int = Field(default=1024, gt=0)

    @field_validator("feature_count")
    @classmethod
    def _even_feature_count(cls, feature_count: int) -> int:
        if feature_count < 0 or feature_count % 2:
            raise DomainError(
                "feature_count must be a non-negative even number",
                error_data={"feature_count": feature_count},
            )
        return feature_count

    @model_validator(mode="after")
    def _mlp_shapes(self) -> "SinkBiasParams":
        hidden = self.mlp_b1.size
        expected = (hidden, self.feature_count + 1)
        if self.mlp_w1.shape != expected or self.mlp_w2.shape != (hidden,):
            raise DomainError(
                "Sink MLP weight shapes are inconsistent",
                error_data={
                    "mlp_w1": list(self.mlp_w1.shape),
                    "mlp_b1": list(self.mlp_b1.shape),
                    "mlp_w2": list(self.mlp_w2.shape),
                    "expected_w1": list(expected),
                },
            )
        values = (self.mlp_w1, self.mlp_b1, self.mlp_w2, [self.slope, self.mlp_b2])
        if not all(np.all(np.isfinite(v)) for v in values):
            raise DomainError("Sink parameters must be finite")
        return self

    @property
    def hidden(self) -> int:
        return int(self.mlp_b1.size)

    @classmethod
    def zeros(
        cls,
        l_ref: int = 1024,
        hidden: int = DEFAULT_SINK_HIDDEN,
        feature_count: int = DEFAULT_SINK_FEATURES,
    ) -> "SinkBiasParams":
        return cls(
            mlp_w1=np.zeros((hidden, feature_count + 1)),
            mlp_b1=np.zeros(hidden),
            mlp_w2=np.zeros(hidden),
            feature_count=feature_count,
            l_ref=l_ref,
        )

    @classmethod
    def random(
        cls,
        rng: np.random.Generator,
        l_ref: int = 1024,
        hidden: int = DEFAULT_SINK_HIDDEN,
        feature_count: int = DEFAULT_SINK_FEATURES,
        scale: float = 0.5,
    ) -> "SinkBiasParams":
        return cls(
            slope=float(rng.normal(scale=scale)),
            mlp_w1=rng.normal(scale=scale, size=(hidden, feature_count + 1)),
            mlp_b1=rng.normal(scale=scale, size=hidden),
            mlp_w2=rng.normal(scale=scale, size=hidden),
            mlp_b2=float(rng.normal(scale=scale)),
            feature_count=feature_count,
            l_ref=l_ref,
        )

    @classmethod
    def alibi_init(
        cls,
        lam: float,
        l_ref: int = 1024,
        hidden: int = DEFAULT_SINK_HIDDEN,
        feature_count: int = DEFAULT_SINK_FEATURES,
    ) -> "SinkBiasParams":
        """Key-linear bias u(j) = lam * j, the causal form of an exponential
        recency prior with decay `lam` per position of lag."""
        zeros = cls.zeros(l_ref=l_ref, hidden=hidden, feature_count=feature_count)
        return zeros.model_copy(update={"slope": float(lam) * l_ref})


class GoatHeadConfig(DomainModel):
    # echoed configs carry the computed d_p / d_c back in
    model_config = ConfigDict(extra="ignore")

    d_h: int
    R: int
    causal: bool = True

    @computed_field  # type: ignore[prop-decorator]
    @property
    def d_p(self) -> int:
        # R frequency pairs, one sink lane, one zero pad
        return 2 * self.R + 2

    @computed_field  # type: ignore[prop-decorator]
    @property
    def d_c(self) -> int:
        return self.d_h - self.d_p

    @model_validator(mode="after")
    def _content_lanes_left(self) -> "GoatHeadConfig":
        if self.R < 0 or self.d_c < 1:
            raise DomainError(
                "Head dimension leaves no content lanes",
                error_data={"d_h": self.d_h, "R": self.R, "d_p": self.d_p},
            )
        return self


class PriorDocument(BaseValidationSchema):
    """Flat JSON form of a spectral + sink parameter pair."""

    frequencies: list[float]
    alpha: list[float]
    beta: list[float]
    slope: float
    mlp_w1: list[list[float]]
    mlp_b1: list[float]
    mlp_w2: list[float]
    mlp_b2: float
    feature_count: int
    l_ref: int
