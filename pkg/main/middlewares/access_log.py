import logging
import time
from typing import TYPE_CHECKING, TypedDict

from main.libs.log import get_logger


if TYPE_CHECKING:
    from asgiref.typing import (
        ASGI3Application,
        ASGIReceiveCallable,
        ASGISendCallable,
        ASGISendEvent,
        HTTPScope,
    )


class AccessInfo(TypedDict, total=False):
    status: int
    start_time: float
    end_time: float


class AccessLogMiddleware:
    """One structured line per HTTP request: method, path, status, duration."""

    def __init__(
        self,
        app: "ASGI3Application",
        logger: logging.Logger | None = None,
    ):
        self.app = app
        self.logger = logger or get_logger("http.access")
        logging.getLogger("uvicorn.access").disabled = True

    async def __call__(
        self,
        scope: "HTTPScope",
        receive: "ASGIReceiveCallable",
        send: "ASGISendCallable",
    ):
        if scope["type"] != "http":
            await self.app(scope, receive, send)  # pragma: no cover
            return

        info = AccessInfo(status=500)

        async def wrapped_send(message: "ASGISendEvent"):
            if message["type"] == "http.response.start":
                info["status"] = message["status"]
            await send(message)

        info["start_time"] = time.perf_counter()
        try:
            await self.app(scope, receive, wrapped_send)
        finally:
            info["end_time"] = time.perf_counter()
            self.log(scope, info)

    def log(self, scope: "HTTPScope", info: AccessInfo):
        client = scope.get("client")
        self.logger.info(
            "%s %s",
            scope["method"],
            scope["root_path"] + scope["path"],
            data={  # type: ignore[call-arg]
                "status": info["status"],
                "duration_ms": round(1000 * (info["end_time"] - info["start_time"]), 3),
                "client": f"{client[0]}:{client[1]}" if client else "-",
            },
        )
