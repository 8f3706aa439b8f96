import numpy as np
import scipy
import torch
from fastapi import APIRouter

from main._config import config
from main.enums import Suite


router = APIRouter()


@router.get("/pings")
async def ping():
    return {}


@router.get("/ready")
async def is_ready():
    """Numerical stack and the verification suites this instance can run."""
    return {
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "torch": torch.__version__,
        "threads": config.GOAT_THREADS,
        "suites": Suite.get_values(),
    }
