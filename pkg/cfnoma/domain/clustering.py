"""
User clustering for NOMA: Lloyd's k-means with three seedings, distance-based
pairing baselines, silhouette-driven choice of L and in-cluster decode order.

Features are rows of an N x d array (row n is the large-scale fading vector of
UE n over the APs). Every tie is broken by the lowest index.
"""

from itertools import combinations
from typing import Iterable, List, Literal, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.spatial.distance import cdist, pdist, squareform

from ..core.errors import EmptyClusterError, InvalidInputError
from ..core.logger import msg_logger
from ..schemas.clustering import Clustering
from .network import SeedLike

Algorithm = Literal["kmeans", "kmeanspp", "improved", "near", "far", "random"]
ALGORITHMS = ("kmeans", "kmeanspp", "improved", "near", "far", "random")


def feature_set(beta: ArrayLike) -> np.ndarray:
    """N x M feature matrix from an M x N fading matrix (a length-N vector gives N x 1)."""
    b = np.asarray(beta, dtype=float)
    if b.ndim == 1:
        return b.reshape(-1, 1)
    return b.T.copy()


def _as_features(features: ArrayLike) -> np.ndarray:
    f = np.asarray(features, dtype=float)
    if f.ndim == 1:
        f = f.reshape(-1, 1)
    if f.ndim != 2 or not np.all(np.isfinite(f)):
        raise InvalidInputError("features must be a finite N x d array")
    return f


def _clustering_from_labels(labels: np.ndarray, centroids: np.ndarray, trace: Sequence[float] = ()) -> Clustering:
    clusters = [np.flatnonzero(labels == l).tolist() for l in range(len(centroids))]
    return Clustering(clusters=clusters, centroids=centroids.tolist(), objective_trace=list(trace))


def within_cluster_ss(features: ArrayLike, labels: ArrayLike, centroids: ArrayLike) -> float:
    """Sum of squared distances of every UE to its own centroid."""
    f = _as_features(features)
    c = np.asarray(centroids, dtype=float).reshape(-1, f.shape[1])
    lab = np.asarray(labels, dtype=int)
    return float(np.sum((f - c[lab]) ** 2))


# ----------------------
# Lloyd Iteration Pieces
# ----------------------
def assign_to_nearest(features: ArrayLike, centroids: ArrayLike) -> np.ndarray:
    f = _as_features(features)
    c = np.asarray(centroids, dtype=float)
    if c.size == 0:
        raise InvalidInputError("at least one centroid is required")
    c = c.reshape(-1, f.shape[1])
    # argmin returns the first minimum, i.e. the lowest cluster index on ties
    return np.argmin(cdist(f, c), axis=1)


def update_centroids(features: ArrayLike, assignment: ArrayLike, num_clusters: Optional[int] = None) -> np.ndarray:
    f = _as_features(features)
    labels = np.asarray(assignment, dtype=int)
    L = int(labels.max()) + 1 if num_clusters is None else num_clusters
    counts = np.bincount(labels, minlength=L)
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise EmptyClusterError(empty.tolist())
    sums = np.zeros((L, f.shape[1]))
    np.add.at(sums, labels, f)
    return sums / counts[:, None]


def _repair_empty(features: np.ndarray, labels: np.ndarray, centroids: np.ndarray, empty: Iterable[int]) -> np.ndarray:
    labels = labels.copy()
    for l in empty:
        sizes = np.bincount(labels, minlength=len(centroids))
        spread = np.linalg.norm(features - centroids[labels], axis=1)
        # never strip the last member of another cluster
        spread[sizes[labels] <= 1] = -np.inf
        donor = int(np.argmax(spread))
        labels[donor] = l
        centroids[l] = features[donor]
        msg_logger.debug("k-means: reseeded empty cluster %d with UE %d", l, donor)
    return labels


def kmeans(
    features: ArrayLike,
    L: int,
    init_centroids: ArrayLike,
    max_iters: int = 100,
    gamma: Optional[ArrayLike] = None,
) -> Clustering:
    """
    Lloyd's algorithm from the given centroids.

    Stops when the assignment no longer changes or after `max_iters` rounds.
    A centroid that loses every member is reseeded with the UE farthest from
    its current centroid.

    Parameters:
    - features: N x d feature matrix
    - L (int): number of clusters, 1 <= L <= N
    - init_centroids: L x d starting centroids
    - max_iters (int): iteration cap, at least 1
    - gamma (optional): estimate variances; when given the clusters are put in decode order

    Returns:
    - clustering (Clustering): clusters, final centroids and the objective after each iteration
    """
    f = _as_features(features)
    N = f.shape[0]
    if not 1 <= L <= N:
        raise InvalidInputError(f"L={L} must lie in [1, N={N}]")
    centroids = np.asarray(init_centroids, dtype=float).reshape(-1, f.shape[1]).copy()
    if centroids.shape[0] != L:
        raise InvalidInputError(f"expected {L} initial centroids, got {centroids.shape[0]}")
    if max_iters < 1:
        raise InvalidInputError(f"max_iters must be at least 1, got {max_iters}")

    labels = np.full(N, -1)
    trace: List[float] = []
    for it in range(max_iters):
        new_labels = assign_to_nearest(f, centroids)
        empty = np.setdiff1d(np.arange(L), new_labels)
        if empty.size:
            new_labels = _repair_empty(f, new_labels, centroids, empty)
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centroids = update_centroids(f, labels, L)
        trace.append(within_cluster_ss(f, labels, centroids))
    msg_logger.debug("k-means: L=%d converged after %d iterations", L, len(trace))

    result = _clustering_from_labels(labels, centroids, trace)
    if gamma is not None:
        result = order_within_cluster(gamma, result)
    return result


# --------------
# Initialization
# --------------
def random_init(features: ArrayLike, L: int, seed: SeedLike) -> np.ndarray:
    """L distinct UEs drawn uniformly; the seeding of plain k-means."""
    f = _as_features(features)
    if not 1 <= L <= f.shape[0]:
        raise InvalidInputError(f"L={L} must lie in [1, N={f.shape[0]}]")
    rng = np.random.default_rng(seed)
    return f[rng.choice(f.shape[0], size=L, replace=False)].copy()


def farthest_first_indices(features: ArrayLike, L: int, first: int) -> List[int]:
    """Greedy farthest-first traversal starting from UE `first`."""
    f = _as_features(features)
    chosen = [first]
    nearest = np.linalg.norm(f - f[first], axis=1)
    for _ in range(1, L):
        candidates = nearest.copy()
        candidates[chosen] = -np.inf
        nxt = int(np.argmax(candidates))
        chosen.append(nxt)
        nearest = np.minimum(nearest, np.linalg.norm(f - f[nxt], axis=1))
    return chosen


def kmeanspp_init(features: ArrayLike, L: int, seed: SeedLike, first: Optional[int] = None) -> np.ndarray:
    """
    Uniformly random first centroid, then repeatedly the UE farthest from its nearest chosen centroid.

    `first` pins the opening UE instead of drawing it.
    """
    f = _as_features(features)
    N = f.shape[0]
    if not 1 <= L <= N:
        raise InvalidInputError(f"L={L} must lie in [1, N={N}]")
    if first is None:
        first = int(np.random.default_rng(seed).integers(N))
    return f[farthest_first_indices(f, L, first)].copy()


def serving_counts(beta: ArrayLike) -> np.ndarray:
    """Number of APs for which each UE has the largest coefficient."""
    b = np.atleast_2d(np.asarray(beta, dtype=float))
    best = np.argmax(b, axis=1)
    return np.bincount(best, minlength=b.shape[1])


def improved_kmeanspp_init(beta: ArrayLike, L: int) -> np.ndarray:
    """
    Centroids at the L UEs that are the strongest UE of the most APs.

    Parameters:
    - beta: M x N large-scale coefficients
    - L (int): number of centroids, L <= N

    Returns:
    - L x M centroid matrix (rows are columns of beta)
    """
    b = np.atleast_2d(np.asarray(beta, dtype=float))
    N = b.shape[1]
    if not 1 <= L <= N:
        raise InvalidInputError(f"L={L} must lie in [1, N={N}]")
    counts = serving_counts(b)
    order = np.lexsort((np.arange(N), -counts))
    return b[:, order[:L]].T.copy()


# ----------------
# Cluster Quality
# ----------------
def silhouette_score(features: ArrayLike, clustering: Clustering) -> float:
    f = _as_features(features)
    if clustering.num_clusters < 2:
        raise InvalidInputError("the silhouette score needs at least two clusters")
    labels = clustering.assignment
    dist = squareform(pdist(f))
    L = clustering.num_clusters
    sizes = np.bincount(labels, minlength=L)

    # mean distance of every UE to every cluster (own cluster excludes the UE itself)
    sums = np.zeros((f.shape[0], L))
    for l in range(L):
        sums[:, l] = dist[:, labels == l].sum(axis=1)
    own = sizes[labels]
    b = np.where(own > 1, sums[np.arange(len(labels)), labels] / np.maximum(own - 1, 1), 0.0)
    means = sums / sizes
    means[np.arange(len(labels)), labels] = np.inf
    c = means.min(axis=1)

    top = np.maximum(b, c)
    s = np.where(top > 0, (c - b) / np.where(top > 0, top, 1.0), 0.0)
    s[own == 1] = 0.0
    return float(np.clip(s.mean(), -1.0, 1.0))


def select_num_clusters(features: ArrayLike, L_range: Iterable[int]) -> int:
    """
    Pick L by the mean silhouette of improved k-means++ clusterings; ties go to the smallest L.
    """
    f = _as_features(features)
    candidates = sorted(set(int(L) for L in L_range))
    if not candidates:
        raise InvalidInputError("the range of cluster counts is empty")
    N = f.shape[0]
    if candidates[0] < 2 or candidates[-1] > N - 1:
        raise InvalidInputError(f"cluster counts must lie in [2, {N - 1}]")

    best_L, best_score = candidates[0], -np.inf
    for L in candidates:
        clustering = kmeans(f, L, improved_kmeanspp_init(f.T, L))
        score = silhouette_score(f, clustering)
        msg_logger.debug("silhouette L=%d: %.4f", L, score)
        if score > best_score:
            best_L, best_score = L, score
    return best_L


# -----------------
# Pairing Baselines
# -----------------
def baseline_pairing(
    features: ArrayLike,
    mode: Literal["near", "far", "random"],
    seed: SeedLike = None,
    gamma: Optional[ArrayLike] = None,
) -> Clustering:
    """
    Two-UE clusters by greedy matching on feature distance.

    near pairs the closest remaining couple, far the farthest, random draws a
    uniform perfect matching. With odd N the last three UEs form one cluster.
    """
    f = _as_features(features)
    N = f.shape[0]
    if mode not in ("near", "far", "random"):
        raise InvalidInputError(f"unknown pairing mode {mode!r}")

    if mode == "random":
        perm = np.random.default_rng(seed).permutation(N).tolist()
        groups = [perm[i:i + 2] for i in range(0, N - N % 2, 2)]
        if N % 2 and N > 1:
            groups[-1] = groups[-1] + [perm[-1]]
        elif N == 1:
            groups = [perm]
    else:
        dist = squareform(pdist(f))
        remaining = list(range(N))
        groups = []
        leftover = 3 if N % 2 else 0
        while len(remaining) > leftover:
            pairs = list(combinations(remaining, 2))
            values = np.array([dist[i, j] for i, j in pairs])
            pick = int(np.argmin(values)) if mode == "near" else int(np.argmax(values))
            pair = list(pairs[pick])
            groups.append(pair)
            remaining = [n for n in remaining if n not in pair]
        if remaining:
            groups.append(remaining)

    groups = [sorted(g) for g in groups]
    centroids = [f[g].mean(axis=0).tolist() for g in groups]
    result = Clustering(clusters=groups, centroids=centroids)
    if gamma is not None:
        result = order_within_cluster(gamma, result)
    return result


# ------------
# Decode Order
# ------------
def order_within_cluster(gamma: ArrayLike, clustering: Clustering) -> Clustering:
    """Sort each cluster by descending virtual-channel norm, ties by UE index."""
    g = np.atleast_2d(np.asarray(gamma, dtype=float))
    norms = np.linalg.norm(g, axis=0)
    clusters = [sorted(cluster, key=lambda n: (-norms[n], n)) for cluster in clustering.clusters]
    return clustering.model_copy(update={"clusters": clusters})


# ----------
# Dispatcher
# ----------
def cluster_users(
    beta: ArrayLike,
    L: int,
    algorithm: Algorithm,
    seed: SeedLike = None,
    gamma: Optional[ArrayLike] = None,
    max_iters: int = 100,
) -> Clustering:
    """
    Run one of the clustering algorithms on an M x N fading matrix.

    Pairing baselines ignore L and produce floor(N/2) clusters.
    """
    f = feature_set(beta)
    if algorithm == "kmeans":
        return kmeans(f, L, random_init(f, L, seed), max_iters, gamma)
    if algorithm == "kmeanspp":
        return kmeans(f, L, kmeanspp_init(f, L, seed), max_iters, gamma)
    if algorithm == "improved":
        return kmeans(f, L, improved_kmeanspp_init(beta, L), max_iters, gamma)
    if algorithm in ("near", "far", "random"):
        return baseline_pairing(f, algorithm, seed, gamma)
    raise InvalidInputError(f"unknown clustering algorithm {algorithm!r}")
