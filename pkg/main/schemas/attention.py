from pydantic import model_validator

from main.commons.exceptions import DomainError
from main.enums import AttentionPath

from .base import BaseResponseSchema, DomainModel, FloatArray
from .prior import GoatHeadConfig, SinkBiasParams, SpectralPriorParams


class AttentionBatch(DomainModel):
    """Composite queries/keys (L x d_h) and content-only values (L x d_v)."""

    queries: FloatArray
    keys: FloatArray
    values: FloatArray
    causal: bool = True

    @model_validator(mode="after")
    def _consistent_shapes(self) -> "AttentionBatch":
        shapes = {
            "queries": list(self.queries.shape),
            "keys": list(self.keys.shape),
            "values": list(self.values.shape),
        }
        if any(len(shape) != 2 for shape in shapes.values()):
            raise DomainError("Attention inputs must be matrices", error_data=shapes)
        if self.queries.shape[1] != self.keys.shape[1]:
            raise DomainError("Query and key widths differ", error_data=shapes)
        if not self.queries.shape[0] == self.keys.shape[0] == self.values.shape[0]:
            raise DomainError("Row counts differ", error_data=shapes)
        return self


class GoatHeadParams(DomainModel):
    """Block-diagonal head: learned content projections, analytic positional lanes."""

    w_q: FloatArray
    w_k: FloatArray
    w_v: FloatArray
    spectral: SpectralPriorParams
    sink: SinkBiasParams

    def check(self, cfg: GoatHeadConfig, d_model: int) -> None:
        expected = {
            "w_q": (d_model, cfg.d_c),
            "w_k": (d_model, cfg.d_c),
            "w_v": (d_model, cfg.d_h),
        }
        actual = {"w_q": self.w_q.shape, "w_k": self.w_k.shape, "w_v": self.w_v.shape}
        if actual != expected or self.spectral.rank != cfg.R:
            raise DomainError(
                "Head parameters do not match the head configuration",
                error_data={
                    "expected": {k: list(v) for k, v in expected.items()},
                    "actual": {k: list(v) for k, v in actual.items()},
                    "spectral_R": self.spectral.rank,
                    "cfg_R": cfg.R,
                },
            )


class GoatBlockParams(DomainModel):
    heads: list[GoatHeadParams]
    w_o: FloatArray

    @model_validator(mode="after")
    def _output_projection(self) -> "GoatBlockParams":
        if not self.heads:
            raise DomainError("A block needs at least one head")
        if self.w_o.ndim != 2:
            raise DomainError("Output projection must be a matrix")
        return self


class BenchRecord(BaseResponseSchema):
    L: int
    path: AttentionPath
    bytes: int
    ns_per_token: float
