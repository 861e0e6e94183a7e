"""
Network geometry, large-scale fading and MMSE estimation statistics.

All powers are linear and normalized by the noise power. Randomness only
enters through explicit seeds, so every function is a pure function of its
arguments.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy.spatial.distance import cdist

from ..core.errors import InvalidClusteringError, InvalidInputError
from ..schemas.clustering import Clustering
from ..schemas.system import SystemConfig

SeedLike = Union[int, np.random.SeedSequence, None]


@dataclass(frozen=True)
class Topology:
    ap_positions: np.ndarray      # (M, 2) km
    ue_positions: np.ndarray      # (N, 2) km
    seed: SeedLike = None


@dataclass(frozen=True)
class FadingMap:
    beta: np.ndarray
    gamma: np.ndarray
    upsilon: np.ndarray


# ---------
# Path Loss
# ---------
def path_loss(d: ArrayLike, d0: float = 0.01, d1: float = 0.05) -> Union[float, np.ndarray]:
    """
    Three-slope path loss in dB.

    The log-distance exponent is 3.5 beyond d1, 2 between d0 and d1, and 0 below d0.
    A knee belongs to the slope above it (d == d_j uses the farther slope).

    Parameters:
    - d: distance(s) in km, strictly positive
    - d0, d1 (float): knees in km, 0 < d0 < d1

    Returns:
    - loss in dB (negative numbers), same shape as d
    """
    dist = np.asarray(d, dtype=float)
    if np.any(~np.isfinite(dist)) or np.any(dist <= 0):
        raise InvalidInputError("distances must be positive and finite")
    if not 0 < d0 < d1:
        raise InvalidInputError(f"path-loss knees must satisfy 0 < d0 < d1, got d0={d0}, d1={d1}")

    a0 = (dist < d0).astype(float)
    a1 = (dist < d1).astype(float)
    loss = (
        -140.7
        - 35.0 * np.log10(dist)
        + 20.0 * a0 * np.log10(dist / d0)
        + 15.0 * a1 * np.log10(dist / d1)
    )
    return float(loss) if loss.ndim == 0 else loss


# --------
# Topology
# --------
def sample_disc(count: int, radius: float, rng: np.random.Generator) -> np.ndarray:
    """Draw `count` points uniformly on a disc centred at the origin."""
    if count < 0:
        raise InvalidInputError("point count must be non-negative")
    r = radius * np.sqrt(rng.random(count))
    angle = 2.0 * np.pi * rng.random(count)
    return np.column_stack((r * np.cos(angle), r * np.sin(angle))).reshape(count, 2)


def generate_topology(config: SystemConfig, seed: SeedLike) -> Topology:
    if config.radius <= 0:
        raise InvalidInputError("radius must be positive")
    rng = np.random.default_rng(seed)
    aps = sample_disc(config.num_aps, config.radius, rng)
    ues = sample_disc(config.num_ues, config.radius, rng)
    return Topology(ap_positions=aps, ue_positions=ues, seed=seed)


# ------------------
# Large-Scale Fading
# ------------------
def _shadowed(distances: np.ndarray, config: SystemConfig, seed: SeedLike) -> np.ndarray:
    rng = np.random.default_rng(seed)
    d = np.maximum(distances, config.min_distance)
    pl = path_loss(d, config.d0, config.d1)
    z = rng.standard_normal(d.shape)
    return 10.0 ** ((pl + config.shadow_std * z) / 10.0)


def large_scale_fading(topology: Topology, config: SystemConfig, seed: SeedLike) -> np.ndarray:
    """
    Large-scale coefficients beta (M x N) with independent log-normal shadowing per link.
    """
    distances = cdist(topology.ap_positions, topology.ue_positions)
    return _shadowed(distances.reshape(len(topology.ap_positions), len(topology.ue_positions)), config, seed)


def collocated_fading(topology: Topology, config: SystemConfig, seed: SeedLike) -> np.ndarray:
    """
    Large-scale coefficient of every UE towards a single antenna site at the disc centre.

    Returns a length-N vector; all antennas of the site share it.
    """
    distances = np.linalg.norm(topology.ue_positions, axis=1)
    return _shadowed(distances, config, seed)


# -----------------------
# MMSE Estimation Quality
# -----------------------
def check_partition(clustering: Clustering, num_ues: int) -> None:
    if not clustering.covers(num_ues):
        raise InvalidClusteringError(f"clustering must contain each of the {num_ues} UEs exactly once")


def estimation_stats(
    beta: ArrayLike, clustering: Clustering, config: SystemConfig
) -> Tuple[np.ndarray, np.ndarray]:
    """
    MMSE estimation statistics under intra-cluster pilot contamination.

    Parameters:
    - beta: large-scale coefficients, M x N (a length-N vector is treated as one site)
    - clustering (Clustering): pilot l is shared by the members of cluster l
    - config (SystemConfig): pilot length and uplink pilot powers

    Returns:
    - gamma: estimate variances, same shape as beta
    - upsilon: MMSE scaling factors, same shape as beta
    """
    b = np.asarray(beta, dtype=float)
    vector_input = b.ndim == 1
    b = np.atleast_2d(b)
    num_ues = b.shape[1]
    check_partition(clustering, num_ues)
    if clustering.num_clusters > config.tau_p:
        raise InvalidClusteringError(
            f"{clustering.num_clusters} clusters need at least as many pilots, got {config.tau_p}"
        )

    rho = config.pilot_powers
    if rho.shape[0] != num_ues:
        raise InvalidInputError(f"config describes {rho.shape[0]} UEs, beta has {num_ues}")
    tau_p = config.tau_p
    labels = clustering.assignment

    # membership[n, l] = 1 when UE n sends pilot l
    membership = np.zeros((num_ues, clustering.num_clusters))
    membership[np.arange(num_ues), labels] = 1.0
    received = tau_p * (b * rho) @ membership + 1.0           # (M, L)
    denom = received[:, labels]

    upsilon = np.sqrt(rho) * b / denom
    gamma = tau_p * rho * b ** 2 / denom
    if vector_input:
        return gamma[0], upsilon[0]
    return gamma, upsilon


def build_fading_map(beta: ArrayLike, clustering: Clustering, config: SystemConfig) -> FadingMap:
    gamma, upsilon = estimation_stats(beta, clustering, config)
    return FadingMap(beta=np.asarray(beta, dtype=float), gamma=gamma, upsilon=upsilon)
