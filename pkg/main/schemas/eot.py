import numpy as np
from pydantic import field_validator, model_validator

from main.commons.exceptions import DomainError

from .base import DomainModel, FloatArray


SIMPLEX_ATOL = 1e-12


def check_prob_vector(values: np.ndarray, *, atol: float = SIMPLEX_ATOL) -> np.ndarray:
    """Raise DomainError unless `values` is a point of the probability simplex."""
    if values.ndim != 1 or values.size == 0:
        raise DomainError(
            "Probability vector must be a non-empty 1-D array",
            error_data={"shape": values.shape},
        )
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise DomainError("Probability vector has negative or non-finite entries")
    total = float(values.sum())
    if abs(total - 1.0) > atol:
        raise DomainError(
            "Probability vector does not sum to one",
            error_data={"sum": total},
        )
    return values


class TransportProblem(DomainModel):
    """Scores, prior and temperature of one query row of KL-prior attention."""

    scores: FloatArray
    prior: FloatArray
    temperature: float

    @field_validator("scores")
    @classmethod
    def _finite_scores(cls, scores: np.ndarray) -> np.ndarray:
        if scores.ndim != 1 or scores.size == 0:
            raise DomainError("Scores must be a non-empty 1-D array")
        if not np.all(np.isfinite(scores)):
            raise DomainError("Scores must be finite")
        return scores

    @field_validator("prior")
    @classmethod
    def _positive_prior(cls, prior: np.ndarray) -> np.ndarray:
        check_prob_vector(prior)
        if np.any(prior <= 0):
            # masked keys are removed from the problem, never given zero mass
            raise DomainError(
                "Prior must be strictly positive",
                error_data={"zero_entries": np.flatnonzero(prior <= 0).tolist()},
            )
        return prior

    @field_validator("temperature")
    @classmethod
    def _positive_temperature(cls, temperature: float) -> float:
        if not np.isfinite(temperature) or temperature <= 0:
            raise DomainError(
                "Temperature must be positive",
                error_data={"temperature": temperature},
            )
        return temperature

    @model_validator(mode="after")
    def _same_length(self) -> "TransportProblem":
        if self.scores.shape != self.prior.shape:
            raise DomainError(
                "Scores and prior lengths differ",
                error_data={"scores": self.scores.size, "prior": self.prior.size},
            )
        return self

    @property
    def length(self) -> int:
        return int(self.scores.size)

    @classmethod
    def uniform(cls, scores, temperature: float = 1.0) -> "TransportProblem":
        size = max(len(scores), 1)
        return cls(
            scores=scores,
            prior=np.full(len(scores), 1.0 / size),
            temperature=temperature,
        )
