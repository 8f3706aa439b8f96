from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware

from ._config import config
from .middlewares import AccessLogMiddleware


api_docs_enabled = config.ENVIRONMENT == "local"

app = FastAPI(
    title="goat-attention",
    summary="KL-prior attention, spectral relative priors and their checks",
    openapi_tags=[
        {"name": "probe", "description": "Liveness and readiness."},
        {"name": "verify", "description": "Run property suites on demand."},
        {
            "name": "attention",
            "description": "Closed-form KL-prior weights and log-prior panels.",
        },
    ],
    redoc_url=None,
    docs_url="/docs" if api_docs_enabled else None,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["GET", "POST"],
    allow_headers=["*"],
)

app.add_middleware(AccessLogMiddleware)
