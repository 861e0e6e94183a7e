from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.errors import InvalidConfigError


class SystemConfig(BaseModel):
    """
    Scalar model parameters of one cell-free (or collocated) downlink system.

    Powers are linear and already normalized by the noise power. Per-UE and
    per-AP quantities accept a scalar, which is broadcast to the right length.
    """
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "examples": [
                {
                    "num_aps": 8,
                    "num_ues": 6,
                    "num_antennas": 8,
                    "num_clusters": 3,
                    "coherence_len": 200,
                    "sic_coeff": 0.05,
                    "ul_pilot_power": 5.0e12,
                    "dl_power_budget": 3.1e13,
                }
            ]
        },
    )

    num_aps: int = Field(ge=1, description="Number of APs, M.")
    num_ues: int = Field(ge=1, description="Number of single-antenna UEs, N.")
    num_antennas: int = Field(ge=1, description="Antennas per AP, K.")
    num_clusters: int = Field(ge=1, description="Number of NOMA clusters, L.")
    pilot_len: Optional[int] = Field(default=None, ge=1, description="Pilot length; defaults to L.")
    coherence_len: int = Field(default=200, ge=1, description="Coherence interval length in samples.")
    sic_coeff: Union[float, List[float]] = Field(default=0.05, description="Imperfect-SIC coefficient per UE, in [0, 1].")
    ul_pilot_power: Union[float, List[float]] = Field(description="Normalized uplink pilot power per UE.")
    dl_power_budget: Union[float, List[float]] = Field(description="Normalized downlink power budget per AP.")
    radius: float = Field(default=1.0, gt=0, description="Radius of the deployment disc in km.")
    shadow_std: float = Field(default=8.0, ge=0, description="Shadow-fading standard deviation in dB.")
    d0: float = Field(default=0.01, gt=0, description="First path-loss knee in km.")
    d1: float = Field(default=0.05, gt=0, description="Second path-loss knee in km.")
    min_distance: float = Field(default=0.001, gt=0, description="AP-UE distance clamp in km.")
    fpa_alpha: float = Field(default=1.0, ge=0, description="Exponent of the fractional power allocation.")

    @model_validator(mode="after")
    def _check(self) -> "SystemConfig":
        tau_p = self.tau_p
        if tau_p < self.num_clusters:
            raise ValueError(f"pilot_len {tau_p} is shorter than the number of clusters {self.num_clusters}")
        if tau_p > self.coherence_len:
            raise ValueError(f"pilot_len {tau_p} exceeds coherence_len {self.coherence_len}")
        if not self.d0 < self.d1:
            raise ValueError("path-loss knees must satisfy d0 < d1")

        zeta = self._per(self.sic_coeff, self.num_ues, "sic_coeff")
        if np.any(zeta < 0) or np.any(zeta > 1):
            raise ValueError("sic_coeff must lie in [0, 1]")
        if np.any(self._per(self.ul_pilot_power, self.num_ues, "ul_pilot_power") <= 0):
            raise ValueError("ul_pilot_power must be positive")
        if np.any(self._per(self.dl_power_budget, self.num_aps, "dl_power_budget") < 0):
            raise ValueError("dl_power_budget must be non-negative")
        return self

    @staticmethod
    def _per(value: Union[float, List[float]], count: int, name: str) -> np.ndarray:
        if isinstance(value, (int, float)):
            return np.full(count, float(value))
        arr = np.asarray(value, dtype=float)
        if arr.shape != (count,):
            raise ValueError(f"{name} has {arr.size} entries, expected {count}")
        return arr

    # ---------------
    # Derived values
    # ---------------
    @property
    def tau_p(self) -> int:
        return self.pilot_len if self.pilot_len is not None else self.num_clusters

    @property
    def zeta(self) -> np.ndarray:
        return self._per(self.sic_coeff, self.num_ues, "sic_coeff")

    @property
    def pilot_powers(self) -> np.ndarray:
        return self._per(self.ul_pilot_power, self.num_ues, "ul_pilot_power")

    @property
    def power_budgets(self) -> np.ndarray:
        return self._per(self.dl_power_budget, self.num_aps, "dl_power_budget")

    @property
    def prelog(self) -> float:
        return 1.0 - self.tau_p / self.coherence_len

    @property
    def effective_antennas(self) -> int:
        """K - tau_p, the degrees of freedom left after full-pilot zero-forcing."""
        return self.num_antennas - self.tau_p

    def require_zf_dimension(self) -> None:
        if self.num_antennas <= self.tau_p:
            raise InvalidConfigError(
                f"K={self.num_antennas} antennas must exceed the pilot length {self.tau_p}"
            )

    def with_updates(self, **changes) -> "SystemConfig":
        """Copy with some fields replaced; unlike model_copy the result is validated again."""
        return SystemConfig.model_validate({**self.model_dump(), **changes})

    def collocated(self) -> "SystemConfig":
        """Single-site counterpart: all M*K antennas at one AP under the summed budget."""
        return self.with_updates(
            num_aps=1,
            num_antennas=self.num_aps * self.num_antennas,
            dl_power_budget=float(self.power_budgets.sum()),
        )
