from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field


class SinrBreakdown(BaseModel):
    """
    Power of every term in the SINR of one (target, evaluator) decoding step.

    sinr = ds / (bu + ici + rici + ui + 1); noise power is 1 after normalization.
    """
    model_config = ConfigDict(
        json_schema_extra={
            "examples": [{"ds": 0.5, "bu": 0.5, "ici": 0.0, "rici": 0.0, "ui": 0.0, "sinr": 0.3333333333}]
        }
    )

    ds: float = Field(ge=0, description="Desired-signal power (coherent beamforming gain).")
    bu: float = Field(ge=0, description="Beamforming-gain uncertainty power.")
    ici: float = Field(ge=0, description="Intra-cluster interference left after SIC.")
    rici: float = Field(ge=0, description="Residual intra-cluster interference from imperfect SIC.")
    ui: float = Field(ge=0, description="Inter-cluster interference power.")
    sinr: float = Field(ge=0, description="Resulting signal-to-interference-plus-noise ratio.")

    @classmethod
    def from_terms(cls, ds: float, bu: float, ici: float, rici: float, ui: float) -> "SinrBreakdown":
        return cls(ds=ds, bu=bu, ici=ici, rici=rici, ui=ui, sinr=ds / (bu + ici + rici + ui + 1.0))


class McOracleConfig(BaseModel):
    model_config = ConfigDict(
        json_schema_extra={"examples": [{"num_realizations": 10000, "seed": 7, "tolerance": 0.03}]}
    )

    num_realizations: int = Field(default=10_000, ge=1, description="Small-scale fading realizations.")
    seed: int = Field(default=0, ge=0, description="Root seed of the per-block random streams.")
    tolerance: float = Field(default=0.03, gt=0, description="Accepted relative error per term.")
    block_size: Optional[int] = Field(default=None, ge=1, description="Realizations per block; settings.MC_BLOCK when unset.")


class DecodeStep(BaseModel):
    """
    One SIC decoding step checked by Monte Carlo: UE `evaluator` decodes the stream of UE `target`.

    Members:
    - relative_errors: |empirical - closed form| / closed form per term
    - standard_errors: batch-means standard error of every empirical term
    """
    target: int
    evaluator: int
    closed_form: SinrBreakdown
    empirical: SinrBreakdown
    relative_errors: Dict[str, float]
    standard_errors: Dict[str, float]


class McReport(BaseModel):
    """
    Outcome of comparing the closed-form SINR terms with their Monte Carlo estimates.

    Members:
    - closed_form / empirical: per-UE own-signal breakdowns
    - steps: every (target, evaluator) decoding step, own-signal steps included
    - term_errors: largest relative error per term over all decoding steps
    - se_errors: relative error of each UE's spectral efficiency (worst SINR over its decoders)
    - resampled: realizations redrawn because of an ill-conditioned pilot Gram matrix
    - zf_leakage: largest |estimate^H precoder|^2 towards other clusters, relative to the in-cluster gain
    """
    num_realizations: int
    tolerance: float
    closed_form: List[SinrBreakdown]
    empirical: List[SinrBreakdown]
    term_errors: Dict[str, float]
    se_errors: List[float]
    steps: List[DecodeStep] = Field(default_factory=list)
    resampled: int = 0
    zf_leakage: float = 0.0
    passed: bool = False
