from pydantic import Field

from .base import BaseResponseSchema, DomainModel, FloatArray


class CollapseReport(DomainModel):
    omega: float
    lower: FloatArray
    upper: FloatArray
    posterior: FloatArray
    holds: bool


class RecencyPrior(DomainModel):
    lambda_: float = Field(serialization_alias="lambda")
    distribution: FloatArray
    mean_lag: float


class SensitivityCheck(DomainModel):
    bound: float
    empirical: float
    holds: bool


class AlibiEquivalence(DomainModel):
    p_lag: FloatArray
    p_key: FloatArray
    max_diff: float


class RankReport(DomainModel):
    sigma_1: float
    sigma_2: float
    second_singular_ratio: float
    rank_le_one: bool
    rank: int


class SinkMassPoint(DomainModel):
    omega: float
    sink_mass: float
    lower: float
    upper: float


class PerturbationCheck(DomainModel):
    sensitivity: float
    output_shift: float
    bound: float
    holds: bool


class CheckResult(BaseResponseSchema):
    check_name: str
    cases: int
    failures: int
    max_violation: float
