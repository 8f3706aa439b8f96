import json
import logging
import sys
import time
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any

from main._config import config


def get_logger(name: str):
    logger = logging.getLogger(name)
    logger.setLevel(config.LOGGING_LEVEL)

    formatter = logging.Formatter(
        "[%(asctime)s][%(name)s][%(levelname)s]"
        " (%(module)s:%(funcName)s:%(lineno)d) %(message)s",
    )

    handler = logging.StreamHandler(stream=sys.stdout)
    handler.setFormatter(formatter)

    if not logger.hasHandlers():
        logger.addHandler(handler)

    logger.propagate = False

    return logger


@contextmanager
def log_elapsed(
    logger: logging.Logger,
    message: str,
    data: dict[str, Any] | None = None,
) -> Iterator[dict[str, Any]]:
    """Log `message` once the block exits, with its wall time in `data`.

    The yielded dict can be filled by the block to enrich the log line.
    """
    extra: dict[str, Any] = dict(data or {})
    started = time.perf_counter()
    try:
        yield extra
    finally:
        extra["elapsed_s"] = round(time.perf_counter() - started, 4)
        logger.info(message, data=extra)  # type: ignore[call-arg]


class _CustomLogger(logging.Logger):
    def _log(  # type: ignore[override]
        self,
        level: int,
        msg: str,
        args,
        data=None,
        **kwargs,
    ):
        if data:
            msg = f"{msg} | {json.dumps(data, default=str, sort_keys=True)}"

        # noinspection PyProtectedMember
        super()._log(level, msg, args, **kwargs)


logging.Logger.manager.loggerClass = _CustomLogger
