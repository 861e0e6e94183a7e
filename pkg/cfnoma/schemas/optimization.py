from typing import List, Literal

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

IaStatus = Literal["converged", "max_outer", "subproblem_failed", "zero_budget"]


class IaHistory(BaseModel):
    """
    Trace of one inner-approximation run.

    Members:
    - objectives: prelog * sum of rates of every iterate, the initial point first
    - iterations: number of subproblems solved
    - status: why the loop stopped
    - final_sse: closed-form sum SE of the returned (projected) allocation
    - rho: returned powers, one row per AP (a single row for the collocated system)
    """
    model_config = ConfigDict(
        json_schema_extra={
            "examples": [
                {
                    "objectives": [12.1, 15.8, 16.2, 16.21],
                    "iterations": 3,
                    "status": "converged",
                    "final_sse": 16.21,
                    "rho": [[1.0e12, 2.3e12]],
                }
            ]
        }
    )

    objectives: List[float] = Field(default_factory=list, description="Surrogate objective per iterate.")
    iterations: int = Field(default=0, ge=0, description="Subproblems solved.")
    status: IaStatus = Field(default="converged", description="Stopping reason.")
    final_sse: float = Field(default=0.0, description="Sum SE of the returned allocation in bit/s/Hz.")
    rho: List[List[float]] = Field(default_factory=list, description="Returned powers per AP and UE.")

    def is_monotone(self, slack: float = 1e-6) -> bool:
        return all(b >= a - slack for a, b in zip(self.objectives, self.objectives[1:]))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"iteration": range(len(self.objectives)), "objective": self.objectives})
