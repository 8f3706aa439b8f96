# mypy: ignore-errors

from fastapi import APIRouter

from . import attention_controller, probe, verify_controller


router = APIRouter()

router.include_router(probe.router, tags=["probe"])
router.include_router(verify_controller.router)
router.include_router(attention_controller.router)
