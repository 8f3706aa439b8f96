import numpy as np
from fastapi import APIRouter

from main.engines.eot_core import eot_objective, kl_prior_attention
from main.engines.prior import prior_params_from_document
from main.engines.toy_lm.decomposition import decompose_prior
from main.schemas.api import (
    KLPriorRequest,
    KLPriorResponse,
    LogPriorRequest,
    LogPriorResponse,
)
from main.schemas.eot import TransportProblem


router = APIRouter(prefix="/attention", tags=["attention"])


@router.post("/kl-prior", response_model=KLPriorResponse)
async def kl_prior(request: KLPriorRequest) -> KLPriorResponse:
    if request.prior is None:
        problem = TransportProblem.uniform(
            np.asarray(request.scores),
            request.temperature,
        )
    else:
        problem = TransportProblem(
            scores=request.scores,
            prior=request.prior,
            temperature=request.temperature,
        )
    weights = kl_prior_attention(problem)
    return KLPriorResponse(
        weights=weights.tolist(),
        objective=eot_objective(weights, problem),
    )


@router.post("/log-prior", response_model=LogPriorResponse)
async def log_prior(request: LogPriorRequest) -> LogPriorResponse:
    spectral, sink = prior_params_from_document(request.prior)
    decomposition = decompose_prior(spectral, sink, request.length)
    return LogPriorResponse.model_validate(decomposition.model_dump())
