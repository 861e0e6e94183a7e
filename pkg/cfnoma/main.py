# -------
# FastAPI
# -------
from fastapi import FastAPI

from . import __version__
from .core.errors import CfNomaError

# -------
# Routers
# -------
from .api.v1.dependencies import cfnoma_error_handler
from .api.v1.routes import router as v1_router

app = FastAPI(title="cfnoma API", version=__version__)

# --------------
# Error Handling
# --------------
app.add_exception_handler(CfNomaError, cfnoma_error_handler)

app.include_router(v1_router, prefix="/api/v1")

@app.get("/")
def root():
    return {"service": "cfnoma", "version": __version__}
