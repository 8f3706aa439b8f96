from fastapi import APIRouter
from starlette.concurrency import run_in_threadpool

from main.commons.exceptions import ConfigError
from main.enums import Suite
from main.schemas.api import VerifyRequest, VerifyResponse
from main.services.verifier import run_suites


router = APIRouter(tags=["verify"])


def resolve_suites(names: list[str]) -> list[Suite]:
    unknown = [name for name in names if name not in Suite.get_values()]
    if unknown:
        raise ConfigError(
            "Unknown verification suite",
            error_data={"unknown": unknown, "known": Suite.get_values()},
        )
    return [Suite(name) for name in names]


@router.post("/verify", response_model=VerifyResponse)
async def verify(request: VerifyRequest) -> VerifyResponse:
    suites = resolve_suites(request.suites)
    results = await run_in_threadpool(
        run_suites,
        suites,
        request.seed,
        request.gradcheck_seeds,
    )
    return VerifyResponse(
        passed=not any(result.failures for result in results),
        results=results,
    )
