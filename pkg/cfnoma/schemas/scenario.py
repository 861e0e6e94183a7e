from itertools import product
from typing import Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.config import settings
from .system import SystemConfig

AlgorithmName = Literal["kmeans", "kmeanspp", "improved", "near", "far", "random"]
PaMode = Literal["fixed", "optimized"]
SystemName = Literal["cf", "co"]


def dbm_to_normalized(dbm: float, noise_dbm: float) -> float:
    """Linear power relative to the noise power."""
    return 10.0 ** ((dbm - noise_dbm) / 10.0)


class SweepPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    scenario: int
    layout: int
    M: int
    K: int
    zeta: float
    p_total_dbm: float


class ScenarioConfig(BaseModel):
    """
    One experiment: the physical parameters in the units of a simulation table
    (dBm, MHz, km) and the sweep axes. Unknown keys are rejected.
    """
    model_config = ConfigDict(
        extra="forbid",
        frozen=True,
        json_schema_extra={
            "examples": [
                {
                    "M": 32,
                    "N": 10,
                    "K": 8,
                    "L": 5,
                    "P_total_dbm": [30, 35, 40],
                    "algorithms": ["improved", "kmeans", "random"],
                    "pa_modes": ["fixed", "optimized"],
                    "systems": ["cf", "co"],
                    "num_topologies": 50,
                    "master_seed": 2024,
                }
            ]
        },
    )

    M: int = Field(ge=1, description="Number of APs.")
    N: int = Field(ge=1, description="Number of UEs.")
    K: int = Field(ge=1, description="Antennas per AP.")
    L: Optional[int] = Field(default=None, ge=1, description="Clusters; chosen by silhouette over L_range when omitted.")
    L_range: Optional[List[int]] = Field(default=None, description="Candidate cluster counts for silhouette selection.")
    P_total_dbm: Union[float, List[float]] = Field(description="Total downlink budget of all APs, dBm (sweep axis).")
    zeta: Union[float, List[float]] = Field(default=0.05, description="SIC coefficient (sweep axis).")
    tau_c: int = Field(default=200, ge=1, description="Coherence interval length.")
    tau_p: Optional[int] = Field(default=None, ge=1, description="Pilot length; defaults to L.")
    ue_power_dbm: float = Field(default=23.0, description="Uplink pilot power, dBm.")
    noise_dbm: float = Field(default_factory=lambda: settings.NOISE_DBM, description="Noise power, dBm.")
    bandwidth_mhz: float = Field(default=20.0, gt=0, description="Bandwidth, MHz.")
    radius_km: float = Field(default=1.0, gt=0, description="Deployment disc radius, km.")
    shadow_std_db: float = Field(default=8.0, ge=0, description="Shadow fading standard deviation, dB.")
    d0_km: float = Field(default=0.01, gt=0)
    d1_km: float = Field(default=0.05, gt=0)
    min_distance_km: float = Field(default=0.001, gt=0)
    antenna_layouts: Optional[List[Tuple[int, int]]] = Field(
        default=None, description="(M, K) pairs with a common product; replaces M and K as a sweep axis."
    )
    algorithms: List[AlgorithmName] = Field(default_factory=lambda: ["improved"])
    pa_modes: List[PaMode] = Field(default_factory=lambda: ["fixed"])
    systems: List[SystemName] = Field(default_factory=lambda: ["cf"])
    fpa_alpha: float = Field(default=1.0, ge=0)
    per_ap_budget_dbm: Optional[float] = Field(default=None, description="Per-AP budget override, dBm.")
    num_topologies: int = Field(default=50, ge=1)
    master_seed: int = Field(default=0, ge=0)
    ia_epsilon: Optional[float] = Field(default=None, gt=0)
    ia_max_outer: Optional[int] = Field(default=None, ge=1)
    mc_realizations: int = Field(default=10_000, ge=1)
    mc_tolerance: float = Field(default=0.03, gt=0)
    verify_topologies: int = Field(default=1, ge=1)
    output: Optional[str] = Field(default=None, description="Default output directory of `cfnoma run`.")

    @model_validator(mode="after")
    def _check(self) -> "ScenarioConfig":
        if self.L is None and not self.L_range:
            raise ValueError("either L or a non-empty L_range is required")
        for name in ("P_total_dbm", "zeta"):
            value = getattr(self, name)
            if isinstance(value, list) and not value:
                raise ValueError(f"{name} must not be an empty list")
        if any(not 0 <= z <= 1 for z in self.zeta_values):
            raise ValueError("zeta values must lie in [0, 1]")
        for name in ("algorithms", "pa_modes", "systems"):
            if not getattr(self, name):
                raise ValueError(f"{name} must not be empty")
        if self.antenna_layouts is not None:
            if not self.antenna_layouts:
                raise ValueError("antenna_layouts must not be empty")
            products = {m * k for m, k in self.antenna_layouts}
            if len(products) != 1 or min(min(p) for p in self.antenna_layouts) < 1:
                raise ValueError("antenna_layouts must share one positive M*K product")
        if not self.d0_km < self.d1_km:
            raise ValueError("d0_km must be smaller than d1_km")
        return self

    # -----------
    # Sweep Axes
    # -----------
    @property
    def p_total_values(self) -> List[float]:
        return [float(v) for v in (self.P_total_dbm if isinstance(self.P_total_dbm, list) else [self.P_total_dbm])]

    @property
    def zeta_values(self) -> List[float]:
        return [float(v) for v in (self.zeta if isinstance(self.zeta, list) else [self.zeta])]

    @property
    def layouts(self) -> List[Tuple[int, int]]:
        return list(self.antenna_layouts) if self.antenna_layouts is not None else [(self.M, self.K)]

    def sweep_points(self) -> List[SweepPoint]:
        """Every (layout, power, zeta) combination; the scenario index is the position in this list."""
        points = []
        for (layout, (M, K)), p, z in product(enumerate(self.layouts), self.p_total_values, self.zeta_values):
            points.append(SweepPoint(scenario=len(points), layout=layout, M=M, K=K, zeta=z, p_total_dbm=p))
        return points

    # ----------------
    # Unit Conversion
    # ----------------
    def per_ap_budget(self, M: int, p_total_dbm: float) -> float:
        if self.per_ap_budget_dbm is not None:
            return dbm_to_normalized(self.per_ap_budget_dbm, self.noise_dbm)
        return dbm_to_normalized(p_total_dbm, self.noise_dbm) / M

    def system_config(self, M: int, K: int, L: int, zeta: float, p_total_dbm: float) -> SystemConfig:
        return SystemConfig(
            num_aps=M,
            num_ues=self.N,
            num_antennas=K,
            num_clusters=L,
            pilot_len=self.tau_p,
            coherence_len=self.tau_c,
            sic_coeff=zeta,
            ul_pilot_power=dbm_to_normalized(self.ue_power_dbm, self.noise_dbm),
            dl_power_budget=self.per_ap_budget(M, p_total_dbm),
            radius=self.radius_km,
            shadow_std=self.shadow_std_db,
            d0=self.d0_km,
            d1=self.d1_km,
            min_distance=self.min_distance_km,
            fpa_alpha=self.fpa_alpha,
        )


class TopologySeed(BaseModel):
    layout: int
    topology: int
    entropy: int
    spawn_key: List[int]


class RunManifest(BaseModel):
    """
    Everything needed to rerun a sweep: the resolved scenario, the package
    version and the seed of every topology, plus informational timings.
    """
    version: str
    config: ScenarioConfig
    seeds: List[TopologySeed] = Field(default_factory=list)
    timings: Dict[str, float] = Field(default_factory=dict)
