"""
Closed-form downlink spectral efficiency with full-pilot zero-forcing,
intra-cluster pilot contamination and imperfect SIC, for the cell-free system
and its collocated benchmark, plus the fractional fixed power allocation.

Conventions: `rho` is M x N (cell-free) or length N (collocated), `gamma` and
`beta` have the same shape, and the clustering lists every cluster in decode
order. Collocated functions expect the collocated SystemConfig (one site,
M*K antennas, see SystemConfig.collocated).
"""

from dataclasses import dataclass
from typing import List, Literal, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike

from ..core.errors import InvalidInputError
from ..schemas.clustering import Clustering
from ..schemas.performance import SinrBreakdown
from ..schemas.system import SystemConfig
from .network import check_partition

Mode = Literal["cellfree", "collocated"]
TERMS = ("ds", "bu", "ici", "rici", "ui")


@dataclass(frozen=True)
class PowerAllocation:
    """
    Normalized downlink powers.

    Members:
    - mode: "cellfree" (rho is M x N, per AP and UE) or "collocated" (rho has length N)
    - rho: the powers
    """
    mode: Mode
    rho: np.ndarray

    @property
    def total_per_ap(self) -> np.ndarray:
        return np.atleast_2d(self.rho).sum(axis=1)

    def violations(self, config: SystemConfig, clustering: Clustering, rtol: float = 1e-9) -> List[str]:
        """Budget, sign and SIC-ordering violations, empty when the allocation is valid."""
        problems: List[str] = []
        rho = np.atleast_2d(self.rho)
        if np.any(rho < 0):
            problems.append("negative power")
        budgets = np.atleast_1d(config.power_budgets.sum() if self.mode == "collocated" else config.power_budgets)
        over = rho.sum(axis=1) > budgets * (1 + rtol)
        if np.any(over):
            problems.append(f"budget exceeded at APs {np.flatnonzero(over).tolist()}")
        for l, cluster in enumerate(clustering.clusters):
            if np.any(np.diff(rho[:, cluster], axis=1) < -rtol * np.maximum(rho[:, cluster[1:]], 1.0)):
                problems.append(f"cluster {l} powers decrease towards weaker UEs")
        return problems


# --------------
# SIC Weighting
# --------------
def eta_coeff(l_prime: int, n_pp: int, l: int, n: int, zeta: float) -> float:
    """
    Weight of interferer n'' (decode position `n_pp` in cluster `l_prime`) at UE `n` of cluster `l`.

    Interferers in other clusters and UEs decoded no later than n count fully;
    weaker same-cluster UEs leave only the residual fraction zeta.
    """
    if l_prime != l or n_pp <= n:
        return 1.0
    return float(zeta)


# ----------
# Link Terms
# ----------
def cellfree_terms(rho: np.ndarray, gamma: np.ndarray, beta: np.ndarray, k_eff: int) -> Tuple[np.ndarray, np.ndarray]:
    # [j, e]: power of UE j's stream seen at UE e
    amplitude = np.sqrt(rho).T @ np.sqrt(gamma)
    coherent = k_eff * amplitude ** 2
    noncoherent = rho.T @ (beta - gamma)
    return coherent, noncoherent


def collocated_terms(rho: np.ndarray, gamma: np.ndarray, beta: np.ndarray, k_eff: int) -> Tuple[np.ndarray, np.ndarray]:
    coherent = k_eff * np.outer(rho, gamma)
    noncoherent = np.outer(rho, beta - gamma)
    return coherent, noncoherent


def _validated(
    rho: ArrayLike, gamma: ArrayLike, beta: ArrayLike, clustering: Clustering, config: SystemConfig, mode: Mode
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    config.require_zf_dimension()
    r = np.asarray(rho, dtype=float)
    g = np.asarray(gamma, dtype=float)
    b = np.asarray(beta, dtype=float)
    expected_ndim = 2 if mode == "cellfree" else 1
    if not (r.shape == g.shape == b.shape) or r.ndim != expected_ndim:
        raise InvalidInputError(
            f"rho, gamma and beta must share a {expected_ndim}-D shape, got {r.shape}, {g.shape}, {b.shape}"
        )
    if np.any(r < 0):
        raise InvalidInputError("powers must be non-negative")
    check_partition(clustering, r.shape[-1])
    return r, g, b


def _link_terms(rho, gamma, beta, clustering, config, mode: Mode):
    r, g, b = _validated(rho, gamma, beta, clustering, config, mode)
    builder = cellfree_terms if mode == "cellfree" else collocated_terms
    return builder(r, g, b, config.effective_antennas)


def breakdown(
    coherent: np.ndarray,
    noncoherent: np.ndarray,
    clustering: Clustering,
    zeta: np.ndarray,
    target: int,
    evaluator: int,
) -> SinrBreakdown:
    labels = clustering.assignment
    rank = clustering.rank
    l = labels[target]
    if labels[evaluator] != l or rank[evaluator] > rank[target]:
        raise InvalidInputError(
            f"UE {evaluator} cannot decode UE {target}: it must be a stronger-or-equal member of the same cluster"
        )
    e = evaluator
    members = clustering.clusters[l]
    pos = rank[target]
    stronger = members[:pos]
    weaker = members[pos + 1:]

    ds = coherent[target, e]
    bu = noncoherent[target, e]
    ici = float(np.sum(coherent[stronger, e] + noncoherent[stronger, e]))
    rici = float(zeta[target] * np.sum(coherent[weaker, e] + noncoherent[weaker, e]))
    ui = float(np.sum(noncoherent[labels != l, e]))
    return SinrBreakdown.from_terms(float(ds), float(bu), ici, rici, ui)


def _user_se(coherent: np.ndarray, noncoherent: np.ndarray, clustering: Clustering, config: SystemConfig) -> np.ndarray:
    zeta = config.zeta
    se = np.zeros(clustering.num_ues)
    for cluster in clustering.clusters:
        for pos, n in enumerate(cluster):
            # SIC: every stronger member must decode n before n itself does
            worst = min(breakdown(coherent, noncoherent, clustering, zeta, n, e).sinr for e in cluster[:pos + 1])
            se[n] = config.prelog * np.log2(1.0 + worst)
    return se


# ---------
# Cell-Free
# ---------
def sinr_cf(
    target: int, evaluator: int, rho: ArrayLike, gamma: ArrayLike, beta: ArrayLike,
    clustering: Clustering, config: SystemConfig,
) -> SinrBreakdown:
    """
    SINR terms when UE `evaluator` decodes the stream of UE `target` (evaluator == target for its own signal).
    """
    coherent, noncoherent = _link_terms(rho, gamma, beta, clustering, config, "cellfree")
    return breakdown(coherent, noncoherent, clustering, config.zeta, target, evaluator)


def user_se_vector_cf(rho, gamma, beta, clustering: Clustering, config: SystemConfig) -> np.ndarray:
    coherent, noncoherent = _link_terms(rho, gamma, beta, clustering, config, "cellfree")
    return _user_se(coherent, noncoherent, clustering, config)


def user_se_cf(target: int, rho, gamma, beta, clustering: Clustering, config: SystemConfig) -> float:
    return float(user_se_vector_cf(rho, gamma, beta, clustering, config)[target])


def sum_se_cf(rho, gamma, beta, clustering: Clustering, config: SystemConfig) -> float:
    return float(user_se_vector_cf(rho, gamma, beta, clustering, config).sum())


# ----------
# Collocated
# ----------
def sinr_co(
    target: int, evaluator: int, rho_co: ArrayLike, gamma_co: ArrayLike, beta_co: ArrayLike,
    clustering: Clustering, config: SystemConfig,
) -> SinrBreakdown:
    coherent, noncoherent = _link_terms(rho_co, gamma_co, beta_co, clustering, config, "collocated")
    return breakdown(coherent, noncoherent, clustering, config.zeta, target, evaluator)


def user_se_vector_co(rho_co, gamma_co, beta_co, clustering: Clustering, config: SystemConfig) -> np.ndarray:
    coherent, noncoherent = _link_terms(rho_co, gamma_co, beta_co, clustering, config, "collocated")
    return _user_se(coherent, noncoherent, clustering, config)


def user_se_co(target: int, rho_co, gamma_co, beta_co, clustering: Clustering, config: SystemConfig) -> float:
    return float(user_se_vector_co(rho_co, gamma_co, beta_co, clustering, config)[target])


def sum_se_co(rho_co, gamma_co, beta_co, clustering: Clustering, config: SystemConfig) -> float:
    return float(user_se_vector_co(rho_co, gamma_co, beta_co, clustering, config).sum())


# ---------------------------
# Fractional Power Allocation
# ---------------------------
def fixed_pa(
    gamma: ArrayLike, clustering: Clustering, config: SystemConfig, alpha: Optional[float] = None,
) -> PowerAllocation:
    """
    Equal budget share per cluster, split inside the cluster in proportion to
    the virtual-channel norm raised to -alpha.

    A length-N gamma selects the collocated system (one budget, the sum over APs);
    an M x N gamma gives every AP the same split of its own budget.
    """
    g = np.asarray(gamma, dtype=float)
    alpha = config.fpa_alpha if alpha is None else alpha
    if alpha < 0:
        raise InvalidInputError("the fractional exponent must be non-negative")
    collocated = g.ndim == 1
    g2 = np.atleast_2d(g)
    check_partition(clustering, g2.shape[1])

    norms = np.linalg.norm(g2, axis=0)
    weights = norms ** (-alpha)
    share = np.zeros(g2.shape[1])
    for cluster in clustering.clusters:
        share[cluster] = weights[cluster] / weights[cluster].sum()

    if collocated:
        total = float(config.power_budgets.sum())
        return PowerAllocation(mode="collocated", rho=total / clustering.num_clusters * share)

    budgets = config.power_budgets
    if budgets.shape[0] != g2.shape[0]:
        raise InvalidInputError(f"config has {budgets.shape[0]} AP budgets, gamma has {g2.shape[0]} rows")
    rho = np.outer(budgets / clustering.num_clusters, share)
    return PowerAllocation(mode="cellfree", rho=rho)
