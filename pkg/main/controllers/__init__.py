from ._router import router
