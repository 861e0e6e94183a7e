import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from scipy import stats

from .. import __version__
from ..core.config import settings
from ..core.errors import CfNomaError, InvalidInputError
from ..core.logger import error_logger, msg_logger
from ..domain.clustering import ALGORITHMS, cluster_users, feature_set, order_within_cluster, select_num_clusters
from ..domain.montecarlo import mc_verify
from ..domain.network import collocated_fading, estimation_stats, generate_topology, large_scale_fading
from ..domain.solver import ia_maximize
from ..domain.sse import fixed_pa, user_se_vector_cf, user_se_vector_co
from ..schemas.clustering import Clustering
from ..schemas.evaluation import (
    HISTORY_COLUMNS,
    RESULT_COLUMNS,
    USER_SE_COLUMNS,
    HistoryRecord,
    PairedComparison,
    ResultRow,
    TopologyOutcome,
    UserSeRow,
)
from ..schemas.performance import McOracleConfig, McReport
from ..schemas.scenario import RunManifest, ScenarioConfig, SweepPoint, TopologySeed
from ..schemas.system import SystemConfig

GROUP_KEYS = ["scenario", "algorithm", "pa_mode", "system", "M", "K", "zeta", "p_total_dbm"]
Z95 = float(stats.norm.ppf(0.975))
SYSTEMS = ("cf", "co")

# evaluation failures that become error rows instead of aborting the sweep
EVALUATION_ERRORS = (CfNomaError, ValueError, ArithmeticError, np.linalg.LinAlgError)


@dataclass(frozen=True)
class _Layout:
    """Fading realization of one (layout, topology) task, shared by every sweep point of the layout."""
    seed: np.random.SeedSequence
    M: int
    K: int
    beta: np.ndarray
    beta_co: np.ndarray
    L: int
    cluster_seeds: List[np.random.SeedSequence]
    verify_seed: np.random.SeedSequence


@dataclass
class SweepResult:
    results: pd.DataFrame
    user_se: pd.DataFrame
    histories: pd.DataFrame
    manifest: RunManifest

    @property
    def failures(self) -> int:
        return int((self.results["status"] == "error").sum())


class ExperimentService:
    """
    Application service running experiment sweeps.

    Members:
    - workers: default thread count for topology tasks and Monte Carlo blocks

    Methods:
    - evaluate_topology: every sweep point of one layout on one seeded topology
    - run_sweep / write_outputs: all topologies, as plot-ready tables plus a manifest
    - reduce_results: per-sweep-point means and 95% confidence intervals
    - verify / verify_topology: Monte Carlo check of the closed-form SINR terms
    - paired_comparison: one-sided paired t-test between two algorithms
    """

    def __init__(self, workers: Optional[int] = None):
        self.workers = workers or settings.WORKERS

    # -----
    # Seeds
    # -----
    @staticmethod
    def topology_seed(config: ScenarioConfig, layout: int, topology: int) -> np.random.SeedSequence:
        return np.random.SeedSequence(config.master_seed, spawn_key=(layout, topology))

    def _layout(self, config: ScenarioConfig, layout: int, topology: int) -> _Layout:
        seed = self.topology_seed(config, layout, topology)
        topo_seed, fading_seed, co_seed, cluster_seed, verify_seed = seed.spawn(5)
        M, K = config.layouts[layout]
        first = config.sweep_points()[0]
        # geometry and fading do not depend on L, power or zeta
        base = config.system_config(M, K, config.L or 1, first.zeta, first.p_total_dbm)
        topo = generate_topology(base, topo_seed)
        beta = large_scale_fading(topo, base, fading_seed)
        beta_co = collocated_fading(topo, base, co_seed)
        L = config.L if config.L is not None else select_num_clusters(feature_set(beta), config.L_range)
        return _Layout(
            seed=seed, M=M, K=K, beta=beta, beta_co=beta_co, L=L,
            cluster_seeds=cluster_seed.spawn(len(ALGORITHMS) * len(SYSTEMS)),
            verify_seed=verify_seed,
        )

    # ----------
    # Evaluation
    # ----------
    def _system_config(
        self, config: ScenarioConfig, data: _Layout, clustering: Clustering, point: SweepPoint, system: str
    ) -> SystemConfig:
        cfg = config.system_config(data.M, data.K, clustering.num_clusters, point.zeta, point.p_total_dbm)
        return cfg.collocated() if system == "co" else cfg

    def _cluster(
        self, config: ScenarioConfig, data: _Layout, algorithm: str, system: str, point: SweepPoint
    ) -> Tuple[Clustering, np.ndarray, np.ndarray]:
        beta = data.beta if system == "cf" else data.beta_co
        seed = data.cluster_seeds[ALGORITHMS.index(algorithm) * len(SYSTEMS) + SYSTEMS.index(system)]
        clustering = cluster_users(beta, data.L, algorithm, seed)
        cfg = self._system_config(config, data, clustering, point, system)
        # estimate quality depends on pilot sharing only, so one gamma serves every power and zeta
        gamma, _ = estimation_stats(beta, clustering, cfg)
        return order_within_cluster(gamma, clustering), gamma, beta

    def evaluate_topology(self, config: ScenarioConfig, layout: int, topology: int) -> TopologyOutcome:
        """
        Evaluate every (algorithm, system, sweep point, PA mode) of one layout on one topology.

        A failing evaluation becomes a row with status "error"; the others still run.
        """
        if not 0 <= layout < len(config.layouts):
            raise InvalidInputError(f"layout {layout} is outside the {len(config.layouts)} configured layouts")
        points = [p for p in config.sweep_points() if p.layout == layout]
        outcome = TopologyOutcome(layout=layout, topology=topology)
        M, K = config.layouts[layout]

        def error_row(point: SweepPoint, algorithm: str, system: str, pa_mode: str, L: int, exc: Exception) -> ResultRow:
            message = f"scenario {point.scenario} topology {topology} {algorithm}/{system}/{pa_mode}: {exc}"
            error_logger.warning("evaluation failed: %s", message)
            outcome.error_messages.append(message)
            return ResultRow(
                scenario=point.scenario, seed=topology, algorithm=algorithm, pa_mode=pa_mode, system=system,
                M=M, K=K, L=L, zeta=point.zeta, p_total_dbm=point.p_total_dbm,
                sse_bits_per_hz=None, status="error", iters=0,
            )

        try:
            data = self._layout(config, layout, topology)
        except EVALUATION_ERRORS as exc:
            for point in points:
                for algorithm in config.algorithms:
                    for system in config.systems:
                        for pa_mode in config.pa_modes:
                            outcome.rows.append(error_row(point, algorithm, system, pa_mode, config.L or 0, exc))
            return outcome

        for algorithm in config.algorithms:
            for system in config.systems:
                try:
                    clustering, gamma, beta = self._cluster(config, data, algorithm, system, points[0])
                except EVALUATION_ERRORS as exc:
                    for point in points:
                        for pa_mode in config.pa_modes:
                            outcome.rows.append(error_row(point, algorithm, system, pa_mode, data.L, exc))
                    continue
                for point in points:
                    for pa_mode in config.pa_modes:
                        try:
                            self._evaluate(config, data, outcome, clustering, gamma, beta, point, algorithm, system, pa_mode, topology)
                        except EVALUATION_ERRORS as exc:
                            outcome.rows.append(
                                error_row(point, algorithm, system, pa_mode, clustering.num_clusters, exc)
                            )
        return outcome

    def _evaluate(
        self, config: ScenarioConfig, data: _Layout, outcome: TopologyOutcome, clustering: Clustering,
        gamma: np.ndarray, beta: np.ndarray, point: SweepPoint, algorithm: str, system: str, pa_mode: str,
        topology: int,
    ) -> None:
        cfg = self._system_config(config, data, clustering, point, system)
        iters = 0
        if pa_mode == "fixed":
            rho = fixed_pa(gamma, clustering, cfg).rho
        else:
            allocation, history = ia_maximize(
                cfg, gamma, beta, clustering,
                mode="cellfree" if system == "cf" else "collocated",
                epsilon=config.ia_epsilon, max_outer=config.ia_max_outer,
            )
            rho, iters = allocation.rho, history.iterations
            outcome.histories.append(HistoryRecord(
                scenario=point.scenario, seed=topology, algorithm=algorithm, system=system, history=history,
            ))

        user_se = user_se_vector_cf if system == "cf" else user_se_vector_co
        se = user_se(rho, gamma, beta, clustering, cfg)
        labels = clustering.assignment
        outcome.rows.append(ResultRow(
            scenario=point.scenario, seed=topology, algorithm=algorithm, pa_mode=pa_mode, system=system,
            M=data.M, K=data.K, L=clustering.num_clusters, zeta=point.zeta, p_total_dbm=point.p_total_dbm,
            sse_bits_per_hz=float(se.sum()), status="ok", iters=iters,
        ))
        outcome.user_se += [
            UserSeRow(
                scenario=point.scenario, seed=topology, algorithm=algorithm, pa_mode=pa_mode, system=system,
                ue=n, cluster=int(labels[n]), se_bits_per_hz=float(se[n]),
            )
            for n in range(len(se))
        ]

    # -----
    # Sweep
    # -----
    def run_sweep(self, config: ScenarioConfig, threads: Optional[int] = None) -> SweepResult:
        """
        Run every topology task on a thread pool and merge the rows in (scenario, seed) order.
        """
        tasks = [(layout, topology) for layout in range(len(config.layouts)) for topology in range(config.num_topologies)]
        start = time.perf_counter()
        with ThreadPoolExecutor(max_workers=threads or self.workers) as pool:
            outcomes = list(pool.map(lambda task: self.evaluate_topology(config, *task), tasks))
        elapsed = time.perf_counter() - start
        msg_logger.info("sweep: %d topology tasks finished in %.1f s", len(tasks), elapsed)

        results = pd.DataFrame([r.model_dump() for o in outcomes for r in o.rows], columns=RESULT_COLUMNS)
        user_se = pd.DataFrame([r.model_dump() for o in outcomes for r in o.user_se], columns=USER_SE_COLUMNS)
        histories = pd.DataFrame(
            [
                {
                    "scenario": rec.scenario, "seed": rec.seed, "algorithm": rec.algorithm, "system": rec.system,
                    "iteration": it, "objective": value, "status": rec.history.status,
                }
                for o in outcomes for rec in o.histories for it, value in enumerate(rec.history.objectives)
            ],
            columns=HISTORY_COLUMNS,
        )
        results = results.sort_values(["scenario", "seed"], kind="mergesort").reset_index(drop=True)
        user_se = user_se.sort_values(["scenario", "seed"], kind="mergesort").reset_index(drop=True)
        histories = histories.sort_values(["scenario", "seed"], kind="mergesort").reset_index(drop=True)

        seeds = []
        for layout, topology in tasks:
            seq = self.topology_seed(config, layout, topology)
            seeds.append(TopologySeed(layout=layout, topology=topology, entropy=seq.entropy, spawn_key=list(seq.spawn_key)))
        manifest = RunManifest(version=__version__, config=config, seeds=seeds, timings={"sweep_seconds": elapsed})
        return SweepResult(results=results, user_se=user_se, histories=histories, manifest=manifest)

    @staticmethod
    def write_outputs(result: SweepResult, out_dir: Union[str, Path]) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        result.results.to_csv(out / "results.csv", index=False)
        result.user_se.to_csv(out / "user_se.csv", index=False)
        result.histories.to_csv(out / "ia_history.csv", index=False)
        (out / "manifest.json").write_text(result.manifest.model_dump_json(indent=2), encoding="utf-8")
        return out

    # ---------
    # Reduction
    # ---------
    @staticmethod
    def reduce_results(source: Union[pd.DataFrame, str, Path], bandwidth_mhz: Optional[float] = None) -> pd.DataFrame:
        """
        Mean, standard deviation, count and 95% normal-approximation CI half-width of the SSE per sweep point.

        Only rows with status "ok" count. With a bandwidth, the mean throughput in Mbit/s is added.
        """
        frame = pd.read_csv(source) if isinstance(source, (str, Path)) else source.copy()
        if frame.empty:
            raise InvalidInputError("no rows to reduce")
        if "status" in frame.columns:
            frame = frame[frame["status"] == "ok"]
        if frame.empty:
            raise InvalidInputError("no successful rows to reduce")

        keys = [k for k in GROUP_KEYS if k in frame.columns]
        grouped = frame.groupby(keys, sort=True) if keys else frame.groupby(lambda _: 0)
        summary = grouped["sse_bits_per_hz"].agg(sse_mean="mean", sse_std="std", n="count").reset_index()
        summary["sse_std"] = summary["sse_std"].fillna(0.0)
        summary["ci95_half_width"] = Z95 * summary["sse_std"] / np.sqrt(summary["n"])
        if "L" in frame.columns:
            summary["L_mean"] = grouped["L"].mean().to_numpy()
        if bandwidth_mhz is not None:
            summary["throughput_mbps"] = bandwidth_mhz * summary["sse_mean"]
        return summary

    @staticmethod
    def paired_comparison(
        frame: pd.DataFrame, better: str, worse: str, system: str = "cf", pa_mode: str = "fixed", alpha: float = 0.05,
    ) -> PairedComparison:
        ok = frame[(frame["status"] == "ok") & (frame["system"] == system) & (frame["pa_mode"] == pa_mode)]
        keys = ["scenario", "seed"]
        a = ok[ok["algorithm"] == better].set_index(keys)["sse_bits_per_hz"]
        b = ok[ok["algorithm"] == worse].set_index(keys)["sse_bits_per_hz"]
        joined = pd.concat({"better": a, "worse": b}, axis=1, join="inner")
        if len(joined) < 2:
            raise InvalidInputError(f"need at least two shared topologies, found {len(joined)}")
        test = stats.ttest_rel(joined["better"], joined["worse"], alternative="greater")
        p_value = float(test.pvalue)
        return PairedComparison(
            better=better,
            worse=worse,
            n=len(joined),
            mean_difference=float((joined["better"] - joined["worse"]).mean()),
            statistic=float(test.statistic),
            p_value=p_value,
            significant=bool(p_value < alpha),
        )

    # ------------
    # Verification
    # ------------
    def verify_topology(self, config: ScenarioConfig, topology: int) -> McReport:
        """Monte Carlo check of the first sweep point, first algorithm, fixed PA, cell-free system."""
        point = config.sweep_points()[0]
        data = self._layout(config, point.layout, topology)
        clustering, gamma, beta = self._cluster(config, data, config.algorithms[0], "cf", point)
        cfg = self._system_config(config, data, clustering, point, "cf")
        rho = fixed_pa(gamma, clustering, cfg).rho
        mc = McOracleConfig(
            num_realizations=config.mc_realizations,
            seed=int(data.verify_seed.generate_state(1)[0]),
            tolerance=config.mc_tolerance,
        )
        return mc_verify(cfg, beta, clustering, rho, mc, workers=self.workers)

    def verify(self, config: ScenarioConfig) -> List[McReport]:
        reports = []
        for topology in range(config.verify_topologies):
            report = self.verify_topology(config, topology)
            msg_logger.info(
                "verify topology %d: %s (worst term error %.4f)",
                topology, "passed" if report.passed else "FAILED", max(report.term_errors.values()),
            )
            reports.append(report)
        return reports
