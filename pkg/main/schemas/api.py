from pydantic import Field

from .base import BaseResponseSchema, BaseValidationSchema
from .prior import PriorDocument
from .theory import CheckResult


class VerifyRequest(BaseValidationSchema):
    # names are resolved by the controller so unknown suites map to ConfigError
    suites: list[str] = Field(min_length=1)
    seed: int = 0
    gradcheck_seeds: int = Field(default=1, ge=1, le=5)


class VerifyResponse(BaseResponseSchema):
    passed: bool
    results: list[CheckResult]


class KLPriorRequest(BaseValidationSchema):
    scores: list[float]
    prior: list[float] | None = None
    temperature: float = 1.0


class KLPriorResponse(BaseResponseSchema):
    weights: list[float]
    objective: float


class LogPriorRequest(BaseValidationSchema):
    length: int = Field(ge=1, le=1024)
    prior: PriorDocument


class LogPriorResponse(BaseResponseSchema):
    sink: list[float]
    k_sink: list[list[float]]
    k_rel: list[list[float]]
    k_total_centered: list[list[float]]
    induced_prior: list[list[float]]
