from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from .optimization import IaHistory
from .scenario import ScenarioConfig

RESULT_COLUMNS = [
    "scenario", "seed", "algorithm", "pa_mode", "system", "M", "K", "L",
    "zeta", "p_total_dbm", "sse_bits_per_hz", "status", "iters",
]
USER_SE_COLUMNS = ["scenario", "seed", "algorithm", "pa_mode", "system", "ue", "cluster", "se_bits_per_hz"]
HISTORY_COLUMNS = ["scenario", "seed", "algorithm", "system", "iteration", "objective", "status"]


class ResultRow(BaseModel):
    """One evaluation of one sweep point on one topology."""
    model_config = ConfigDict(
        json_schema_extra={
            "examples": [
                {
                    "scenario": 0, "seed": 3, "algorithm": "improved", "pa_mode": "fixed", "system": "cf",
                    "M": 32, "K": 8, "L": 5, "zeta": 0.05, "p_total_dbm": 40.0,
                    "sse_bits_per_hz": 21.37, "status": "ok", "iters": 0,
                }
            ]
        }
    )

    scenario: int
    seed: int = Field(description="Topology index inside the layout.")
    algorithm: str
    pa_mode: str
    system: str
    M: int
    K: int
    L: int = Field(description="Clusters actually formed (pairing baselines form floor(N/2)).")
    zeta: float
    p_total_dbm: float
    sse_bits_per_hz: Optional[float] = None
    status: Literal["ok", "error"] = "ok"
    iters: int = 0


class UserSeRow(BaseModel):
    scenario: int
    seed: int
    algorithm: str
    pa_mode: str
    system: str
    ue: int
    cluster: int
    se_bits_per_hz: float


class HistoryRecord(BaseModel):
    scenario: int
    seed: int
    algorithm: str
    system: str
    history: IaHistory


class TopologyOutcome(BaseModel):
    """Every row produced by one (layout, topology) task."""
    layout: int
    topology: int
    rows: List[ResultRow] = Field(default_factory=list)
    user_se: List[UserSeRow] = Field(default_factory=list)
    histories: List[HistoryRecord] = Field(default_factory=list)
    error_messages: List[str] = Field(default_factory=list)


class EvaluationRequest(BaseModel):
    model_config = ConfigDict(
        json_schema_extra={
            "examples": [
                {"config": {"M": 8, "N": 6, "K": 8, "L": 3, "P_total_dbm": 40}, "layout": 0, "topology": 0}
            ]
        }
    )

    config: ScenarioConfig
    layout: int = Field(default=0, ge=0, description="Index into the antenna layouts.")
    topology: int = Field(default=0, ge=0, description="Topology index; seeds derive from master_seed.")


class VerifyRequest(BaseModel):
    config: ScenarioConfig
    topology: int = Field(default=0, ge=0)


class PairedComparison(BaseModel):
    """
    One-sided paired t-test that `better` reaches a higher SSE than `worse` on shared topologies.
    """
    better: str
    worse: str
    n: int
    mean_difference: float
    statistic: float
    p_value: float
    significant: bool
