from fastapi import Request
from fastapi.responses import JSONResponse

from ...core.errors import CfNomaError
from ...core.logger import error_logger
from ...schemas.error import ErrorResponse
from ...services.experiment_service import ExperimentService

# ------------------------------
# Initialize Shared Dependencies
# ------------------------------
experiment_service = ExperimentService()


async def cfnoma_error_handler(request: Request, exc: CfNomaError) -> JSONResponse:
    error_logger.warning("%s %s rejected: %s", request.method, request.url.path, exc)
    return JSONResponse(status_code=422, content=ErrorResponse(detail=str(exc)).model_dump())
