import pydantic
from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from starlette.exceptions import HTTPException as StarletteHTTPException

from main.libs.log import get_logger

from .exceptions import (
    BaseError,
    InternalServerError,
    StatusCode,
    ValidationError,
    validation_details,
)


logger = get_logger(__name__)


def register_error_handlers(app: FastAPI):
    @app.exception_handler(StarletteHTTPException)
    async def http_exception_handler(_, exc: StarletteHTTPException):
        return BaseError(
            error_message=exc.detail,
            error_code=exc.status_code * 1000,
            status_code=exc.status_code,
        ).to_response()

    @app.exception_handler(RequestValidationError)
    async def request_validation_handler(_, exc: RequestValidationError):
        return ValidationError(error_data=exc.errors()).to_response()

    @app.exception_handler(pydantic.ValidationError)
    async def model_validation_handler(_, exc: pydantic.ValidationError):
        # models built inside a route from already-parsed payload values
        return ValidationError(error_data=validation_details(exc)).to_response()

    @app.exception_handler(BaseError)
    async def handle_error(request: Request, error: BaseError):
        if error.status_code == StatusCode.INTERNAL_SERVER_ERROR:
            logging_method = logger.error
        else:
            logging_method = logger.warning

        logging_method(
            error.error_message,
            data={
                "path": request.url.path,
                "error_data": error.error_data,
                "error_code": error.error_code,
            },
        )
        return error.to_response()

    @app.exception_handler(Exception)
    async def handle_exception(_, e):
        logger.exception(str(e))

        return InternalServerError().to_response()
