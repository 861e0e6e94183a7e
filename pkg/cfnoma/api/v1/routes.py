from fastapi import APIRouter

from ...schemas.error import ErrorResponse
from ...schemas.evaluation import EvaluationRequest, TopologyOutcome, VerifyRequest
from ...schemas.performance import McReport
from .dependencies import experiment_service

router = APIRouter()

# -------------
# Define Routes
# -------------


# ---------------------------------
# Evaluate One Layout on a Topology
# ---------------------------------
@router.post(
    "/evaluate",
    response_model=TopologyOutcome,
    responses={422: {"model": ErrorResponse}},
)
def evaluate(request: EvaluationRequest) -> TopologyOutcome:
    return experiment_service.evaluate_topology(request.config, request.layout, request.topology)

# ------------------------------
# Monte Carlo Closed-Form Check
# ------------------------------
@router.post(
    "/verify",
    response_model=McReport,
    responses={422: {"model": ErrorResponse}},
)
def verify(request: VerifyRequest) -> McReport:
    return experiment_service.verify_topology(request.config, request.topology)
