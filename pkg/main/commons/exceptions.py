import pydantic
from fastapi.encoders import jsonable_encoder
from fastapi.responses import JSONResponse

from main.schemas.base import ErrorSchema


class StatusCode:
    BAD_REQUEST = 400
    NOT_FOUND = 404
    INTERNAL_SERVER_ERROR = 500


class ExitCode:
    OK = 0
    FAILURE = 1
    USAGE = 2


class ErrorCode:
    BAD_REQUEST = 400000
    VALIDATION_ERROR = 400001
    DOMAIN_ERROR = 400002
    CONFIG_ERROR = 400003
    NOT_FOUND = 404000
    INTERNAL_SERVER_ERROR = 500000
    DIVERGENCE = 500001
    VERIFICATION_FAILED = 500002


class _ErrorMessage:
    BAD_REQUEST = "Bad request."
    VALIDATION_ERROR = "Validation error."
    DOMAIN_ERROR = "Input outside the domain of the operation."
    CONFIG_ERROR = "Invalid run configuration."
    NOT_FOUND = "Not found."
    INTERNAL_SERVER_ERROR = "Internal server error."
    DIVERGENCE = "Training diverged."
    VERIFICATION_FAILED = "Verification failed."


class BaseError(Exception):
    status_code = StatusCode.BAD_REQUEST
    error_message = _ErrorMessage.BAD_REQUEST
    error_code = ErrorCode.BAD_REQUEST
    exit_code = ExitCode.USAGE

    def __init__(
        self,
        error_message=None,
        *,
        error_data=None,
        status_code: int | None = None,
        error_code: int | None = None,
        exit_code: int | None = None,
    ):
        """
        Customize the raised error

        :param error_message: <string> Human readable message
        :param error_data: <dict> Json-serialisable context
        :param status_code: <number> HTTP status code
        :param error_code: <number> error code
        :param exit_code: <number> process exit status used by the CLI
        """
        if error_message is not None:
            self.error_message = error_message

        if status_code is not None:
            self.status_code = status_code

        if error_code is not None:
            self.error_code = error_code

        if exit_code is not None:
            self.exit_code = exit_code

        self.error_data = jsonable_encoder(
            error_data,
            custom_encoder={
                Exception: str,
            },
        )
        super().__init__(self.error_message)

    def to_response(self):
        return JSONResponse(
            ErrorSchema.model_validate(self).model_dump(mode="json"),
            self.status_code,
        )


class BadRequest(BaseError):
    pass


class ValidationError(BaseError):
    error_message = _ErrorMessage.VALIDATION_ERROR
    error_code = ErrorCode.VALIDATION_ERROR


class DomainError(BaseError):
    error_message = _ErrorMessage.DOMAIN_ERROR
    error_code = ErrorCode.DOMAIN_ERROR


class ConfigError(BaseError):
    error_message = _ErrorMessage.CONFIG_ERROR
    error_code = ErrorCode.CONFIG_ERROR


class NotFound(BaseError):
    status_code = StatusCode.NOT_FOUND
    error_message = _ErrorMessage.NOT_FOUND
    error_code = ErrorCode.NOT_FOUND


class InternalServerError(BaseError):
    status_code = StatusCode.INTERNAL_SERVER_ERROR
    error_message = _ErrorMessage.INTERNAL_SERVER_ERROR
    error_code = ErrorCode.INTERNAL_SERVER_ERROR
    exit_code = ExitCode.FAILURE


class DivergenceError(BaseError):
    status_code = StatusCode.INTERNAL_SERVER_ERROR
    error_message = _ErrorMessage.DIVERGENCE
    error_code = ErrorCode.DIVERGENCE
    exit_code = ExitCode.FAILURE


class VerificationFailed(BaseError):
    status_code = StatusCode.INTERNAL_SERVER_ERROR
    error_message = _ErrorMessage.VERIFICATION_FAILED
    error_code = ErrorCode.VERIFICATION_FAILED
    exit_code = ExitCode.FAILURE


def validation_details(exc: pydantic.ValidationError) -> list[dict]:
    """JSON-safe list of a pydantic validation failure's errors."""
    return jsonable_encoder(
        exc.errors(include_url=False, include_context=False, include_input=False),
    )
