from typing import Annotated, Any

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, PlainSerializer


class BaseResponseSchema(BaseModel):
    model_config = ConfigDict(
        from_attributes=True,
    )


class ErrorSchema(BaseResponseSchema):
    """Body of every error response, read off a `BaseError`."""

    error_message: str | None = None
    error_data: Any | None = None
    error_code: int | None = None


class BaseValidationSchema(BaseModel):
    model_config = ConfigDict(
        extra="forbid",
        frozen=True,
        str_strip_whitespace=True,
    )


class DomainModel(BaseModel):
    """Immutable container for numerical parameters (numpy fields allowed)."""

    model_config = ConfigDict(
        arbitrary_types_allowed=True,
        frozen=True,
        extra="forbid",
    )


def _as_float_array(value: Any) -> np.ndarray:
    array = np.array(value, dtype=np.float64)
    array.flags.writeable = False
    return array


def _to_list(array: np.ndarray) -> list:
    return array.tolist()


# Read-only float64 copy of whatever array-like was passed in; dumps as nested lists
FloatArray = Annotated[
    np.ndarray,
    BeforeValidator(_as_float_array),
    PlainSerializer(_to_list, return_type=list),
]
