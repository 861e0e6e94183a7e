"""
Sum spectral-efficiency maximization over downlink powers by inner approximation.

The non-convex program over square-root powers rho_hat is replaced, around an
expansion point, by a second-order cone program whose feasible set lies inside
the original one: SINR ratios are bounded from below by first-order
expansions, ln(1 + phi) by the tangent of ln(1 + 1/phi_bar) with
phi * phi_bar >= 1, and every interference power by an epigraph variable.
Solving it and re-expanding around the solution never decreases the objective.

Expansion points are keyed by (target, evaluator) pairs: evaluator is the UE
that decodes the target's stream, the target itself for its own signal.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike

from ..core.config import settings
from ..core.errors import InitializationError, InvalidInputError, InvalidPointError
from ..core.logger import error_logger, msg_logger
from ..schemas.clustering import Clustering
from ..schemas.optimization import IaHistory
from ..schemas.system import SystemConfig
from .conic import Affine, ConicProgram, ConicSolution, solve_conic
from .network import SeedLike, check_partition
from .sse import Mode, PowerAllocation, breakdown, cellfree_terms, collocated_terms, fixed_pa, sum_se_cf, sum_se_co

Pair = Tuple[int, int]

INITIAL_SHARE = 0.9
POINT_TOL = 1e-6
RHO_FLOOR = 1e-9
MONOTONE_SLACK = 1e-6


@dataclass
class SurrogatePoint:
    """
    Expansion point of one inner-approximation step.

    Members:
    - rho_hat: square-root powers, M x N (cell-free) or length N (collocated)
    - phi: SINR lower bound of every UE
    - varpi: amplitude lower bounds per (target, evaluator), cell-free only
    - theta: interference upper bounds per (target, evaluator)
    - tau: amplitude upper bounds per (target, evaluator) with evaluator != target, cell-free only
    """
    rho_hat: np.ndarray
    phi: np.ndarray
    theta: Dict[Pair, float]
    varpi: Dict[Pair, float] = field(default_factory=dict)
    tau: Dict[Pair, float] = field(default_factory=dict)

    @property
    def mode(self) -> Mode:
        return "cellfree" if np.ndim(self.rho_hat) == 2 else "collocated"


def decode_pairs(clustering: Clustering) -> List[Pair]:
    """(target, evaluator) for every evaluator decoded strictly before its target."""
    return [(n, e) for cluster in clustering.clusters for pos, n in enumerate(cluster) for e in cluster[:pos]]


# -----------------
# Surrogate Bounds
# -----------------
def log_surrogate(phi: ArrayLike, phi_k: ArrayLike) -> np.ndarray:
    """Lower bound of ln(1 + phi), tight at phi == phi_k (phi, phi_k > 0)."""
    phi = np.asarray(phi, dtype=float)
    phi_k = np.asarray(phi_k, dtype=float)
    return np.log1p(phi_k) + phi_k / (phi_k + 1.0) - phi_k ** 2 / ((phi_k + 1.0) * phi)


def ratio_surrogate(varpi: ArrayLike, theta: ArrayLike, varpi_k: ArrayLike, theta_k: ArrayLike, k_eff: int) -> np.ndarray:
    """Lower bound of k_eff * varpi^2 / (theta + 1), affine in (varpi, theta), tight at the expansion point."""
    varpi, theta = np.asarray(varpi, dtype=float), np.asarray(theta, dtype=float)
    vk, tk = np.asarray(varpi_k, dtype=float), np.asarray(theta_k, dtype=float)
    return k_eff * (2.0 * vk / (tk + 1.0) * varpi - vk ** 2 / (tk + 1.0) ** 2 * (theta + 1.0))


def reference_variable_count(clustering: Clustering, num_aps: int) -> int:
    """NM + 3N + 3 * (number of decode pairs), the size of the cell-free subproblem."""
    return clustering.num_ues * num_aps + 3 * clustering.num_ues + 3 * len(decode_pairs(clustering))


def reference_constraint_count(clustering: Clustering, num_aps: int) -> int:
    """Published worst-case constraint tally of the cell-free subproblem."""
    return 8 * sum(len(c) * (len(c) - 1) // 2 + num_aps * (len(c) - 1) for c in clustering.clusters) + num_aps


# weight of every emitted constraint family in the published tally; the
# per-UE families (rate, hyperbolic, own) and the sign rows are not counted there
REFERENCE_WEIGHTS = {"varpi": 2, "tau": 2, "interference": 2, "sinr": 2, "order": 8, "budget": 1}


def constraint_blocks(clustering: Clustering, num_aps: int) -> Dict[str, int]:
    """Constraints per family emitted by build_cf_subproblem (families with no member are left out)."""
    pairs, n_ues, n_clusters = len(decode_pairs(clustering)), clustering.num_ues, len(clustering.clusters)
    blocks = {
        "varpi": pairs, "tau": pairs, "interference": pairs, "sinr": pairs,
        "own": n_ues, "rate": n_ues, "hyperbolic": n_ues,
        "budget": num_aps, "nonneg": num_aps * n_clusters, "order": num_aps * (n_ues - n_clusters),
    }
    return {family: count for family, count in blocks.items() if count}


def weighted_constraint_count(program: ConicProgram) -> int:
    """Constraint count of a cell-free subproblem under the published tally's weighting."""
    return sum(REFERENCE_WEIGHTS.get(family, 0) * count for family, count in program.constraint_families().items())


def subproblem_cost(clustering: Clustering, num_aps: int) -> float:
    """Worst-case interior-point cost v^2 c^2.5 + c^3.5 of one cell-free subproblem."""
    v = reference_variable_count(clustering, num_aps)
    c = reference_constraint_count(clustering, num_aps)
    return float(v) ** 2 * float(c) ** 2.5 + float(c) ** 3.5


# ------------
# Shared Data
# ------------
def _power_scale(total: float) -> float:
    # rho_hat variables are in units of sqrt(largest budget)
    return float(np.sqrt(total)) if total > 0 else 1.0


def _validated_inputs(
    gamma: ArrayLike, beta: ArrayLike, clustering: Clustering, config: SystemConfig, mode: Mode
) -> Tuple[np.ndarray, np.ndarray]:
    config.require_zf_dimension()
    g = np.asarray(gamma, dtype=float)
    b = np.asarray(beta, dtype=float)
    expected = 2 if mode == "cellfree" else 1
    if g.shape != b.shape or g.ndim != expected:
        raise InvalidInputError(f"gamma and beta must share a {expected}-D shape, got {g.shape} and {b.shape}")
    check_partition(clustering, g.shape[-1])
    if mode == "cellfree" and config.power_budgets.shape[0] != g.shape[0]:
        raise InvalidInputError(f"config has {config.power_budgets.shape[0]} AP budgets, gamma has {g.shape[0]} rows")
    return g, b


def _check_point(point: SurrogatePoint, clustering: Clustering, shape: Tuple[int, ...], mode: Mode) -> None:
    if point.mode != mode or np.shape(point.rho_hat) != shape:
        raise InvalidPointError(f"expected a {mode} point with rho_hat of shape {shape}")
    if np.shape(point.phi) != (shape[-1],) or np.any(np.asarray(point.phi) <= 0):
        raise InvalidPointError("phi must be positive for every UE")
    keys = decode_pairs(clustering) + [(n, n) for n in range(shape[-1])]
    missing = [k for k in keys if k not in point.theta or (mode == "cellfree" and k not in point.varpi)]
    if missing:
        raise InvalidPointError(f"expansion values missing for pairs {missing[:5]}")
    if any(point.theta[k] < 0 for k in keys):
        raise InvalidPointError("theta must be non-negative")
    if mode == "cellfree" and any(point.varpi[k] <= 0 for k in keys):
        raise InvalidPointError("varpi must be positive")
    if mode == "collocated" and np.any(np.asarray(point.rho_hat) <= 0):
        raise InvalidPointError("rho_hat must be positive at the expansion point")


def _add_common(
    prog: ConicProgram, point: SurrogatePoint, clustering: Clustering, config: SystemConfig,
    x: np.ndarray, scaled_budgets: np.ndarray,
) -> None:
    """Rate surrogates, hyperbolic cones, budgets, SIC ordering and the objective."""
    n_ues = clustering.num_ues
    r = prog.variables["rate"]
    phi = prog.variables["phi"]
    phi_bar = prog.variables["phi_bar"]
    rows = np.atleast_2d(x)

    for n in range(n_ues):
        pk = float(point.phi[n])
        # r ln 2 <= ln(1 + pk) + pk / (pk + 1) - pk^2 / (pk + 1) * phi_bar
        prog.add_linear(
            Affine.var(r[n], np.log(2.0)) + Affine.var(phi_bar[n], pk ** 2 / (pk + 1.0))
            - (np.log1p(pk) + pk / (pk + 1.0)),
            name=f"rate_{n}",
        )
        # phi * phi_bar >= 1
        half_diff = Affine({int(phi[n]): 0.5, int(phi_bar[n]): -0.5})
        half_sum = Affine({int(phi[n]): 0.5, int(phi_bar[n]): 0.5})
        prog.add_soc([half_diff, Affine(const=1.0)], half_sum, name=f"hyperbolic_{n}")

    for m, row in enumerate(rows):
        prog.add_soc([Affine.var(i) for i in row], Affine(const=float(scaled_budgets[m])), name=f"budget_{m}")
        for l, cluster in enumerate(clustering.clusters):
            prog.add_linear(-Affine.var(row[cluster[0]]), name=f"nonneg_{m}_{l}")
            for a, b in zip(cluster, cluster[1:]):
                prog.add_linear(Affine.var(row[a]) - Affine.var(row[b]), name=f"order_{m}_{a}_{b}")

    prog.minimize(Affine({int(i): -config.prelog for i in r}))


def _verify_point(prog: ConicProgram, values: Dict[str, np.ndarray]) -> None:
    violation = prog.violation(prog.assemble(values))
    if violation > POINT_TOL:
        raise InvalidPointError(f"expansion point violates the convexified constraints by {violation:.3e}")


def _rate_values(phi: np.ndarray) -> Dict[str, np.ndarray]:
    return {"rate": np.log2(1.0 + phi), "phi": phi, "phi_bar": 1.0 / phi}


# ------------------
# Cell-Free Program
# ------------------
def build_cf_subproblem(
    point: SurrogatePoint, gamma: ArrayLike, beta: ArrayLike, clustering: Clustering, config: SystemConfig,
) -> ConicProgram:
    """
    Convex inner approximation of the cell-free sum-SE problem around `point`.

    Parameters:
    - point (SurrogatePoint): expansion point; it must satisfy the program it induces
    - gamma, beta: M x N estimate variances and large-scale coefficients
    - clustering (Clustering): decode-ordered clusters
    - config (SystemConfig): K > pilot length, per-AP budgets, SIC coefficients

    Returns:
    - program (ConicProgram): variables rho_hat (M x N, scaled), rate, phi, phi_bar and
      varpi, theta, tau per decode pair; meta carries "scale" and "pairs"
    """
    g, b = _validated_inputs(gamma, beta, clustering, config, "cellfree")
    M, N = g.shape
    _check_point(point, clustering, (M, N), "cellfree")
    k_eff = config.effective_antennas
    zeta = config.zeta
    labels, rank = clustering.assignment, clustering.rank
    budgets = config.power_budgets
    scale = _power_scale(float(budgets.max()))
    pairs = decode_pairs(clustering)
    slot = {pair: i for i, pair in enumerate(pairs)}

    prog = ConicProgram()
    x = prog.add_variables("rho_hat", (M, N))
    prog.add_variables("rate", N)
    phi = prog.add_variables("phi", N)
    prog.add_variables("phi_bar", N)
    varpi = prog.add_variables("varpi", len(pairs))
    theta = prog.add_variables("theta", len(pairs))
    tau = prog.add_variables("tau", len(pairs))
    prog.meta.update(scale=scale, pairs=pairs, mode="cellfree")

    sqrt_g = np.sqrt(g)
    leak = b - g

    def amplitude(j: int, e: int) -> Affine:
        # sum_m rho_hat[m, j] sqrt(gamma[m, e])
        return Affine({int(x[m, j]): scale * sqrt_g[m, e] for m in range(M)})

    def interference(n: int, e: int) -> List[Tuple[float, Affine]]:
        l = labels[n]
        squares: List[Tuple[float, Affine]] = []
        for j in clustering.clusters[l]:
            if j == n:
                continue
            w = zeta[n] if rank[j] > rank[n] else 1.0
            amp = Affine.var(tau[slot[(j, e)]]) if (j, e) in slot else amplitude(j, e)
            squares.append((w * k_eff, amp))
        for j in range(N):
            w = zeta[n] if labels[j] == l and rank[j] > rank[n] else 1.0
            squares += [(w * scale ** 2 * leak[m, e], Affine.var(x[m, j])) for m in range(M)]
        return squares

    for p, (n, e) in enumerate(pairs):
        vk, tk = point.varpi[(n, e)], point.theta[(n, e)]
        prog.add_linear(Affine.var(varpi[p]) - amplitude(n, e), name=f"varpi_{n}_{e}")
        prog.add_linear(amplitude(n, e) - Affine.var(tau[p]), name=f"tau_{n}_{e}")
        prog.add_squares_bound(interference(n, e), Affine.var(theta[p]), name=f"interference_{n}_{e}")
        surrogate = k_eff * (
            Affine.var(varpi[p], 2.0 * vk / (tk + 1.0)) - vk ** 2 / (tk + 1.0) ** 2 * (Affine.var(theta[p]) + 1.0)
        )
        prog.add_linear(Affine.var(phi[n]) - surrogate, name=f"sinr_{n}_{e}")

    for n in range(N):
        vk, tk = point.varpi[(n, n)], point.theta[(n, n)]
        bound = (
            amplitude(n, n) * (2.0 * (tk + 1.0) / vk)
            - Affine.var(phi[n], (tk + 1.0) ** 2 / (k_eff * vk ** 2))
            - 1.0
        )
        prog.add_squares_bound(interference(n, n), bound, name=f"own_{n}")

    _add_common(prog, point, clustering, config, x, np.sqrt(budgets) / scale)

    phi_k = np.asarray(point.phi, dtype=float)
    _verify_point(prog, {
        "rho_hat": np.asarray(point.rho_hat) / scale,
        **_rate_values(phi_k),
        "varpi": [point.varpi[pair] for pair in pairs],
        "theta": [point.theta[pair] for pair in pairs],
        "tau": [point.tau.get(pair, point.varpi[pair]) for pair in pairs],
    })
    return prog


# -------------------
# Collocated Program
# -------------------
def build_co_subproblem(
    point: SurrogatePoint, gamma_co: ArrayLike, beta_co: ArrayLike, clustering: Clustering, config: SystemConfig,
) -> ConicProgram:
    """
    Collocated counterpart of build_cf_subproblem: one site with `config.num_antennas`
    antennas (see SystemConfig.collocated), variables rho_hat, rate, phi, phi_bar (N each)
    and theta per decode pair.
    """
    g, b = _validated_inputs(gamma_co, beta_co, clustering, config, "collocated")
    N = g.shape[0]
    _check_point(point, clustering, (N,), "collocated")
    k_eff = config.effective_antennas
    zeta = config.zeta
    labels, rank = clustering.assignment, clustering.rank
    total = float(config.power_budgets.sum())
    scale = _power_scale(total)
    pairs = decode_pairs(clustering)

    prog = ConicProgram()
    x = prog.add_variables("rho_hat", N)
    prog.add_variables("rate", N)
    phi = prog.add_variables("phi", N)
    prog.add_variables("phi_bar", N)
    theta = prog.add_variables("theta", len(pairs))
    prog.meta.update(scale=scale, pairs=pairs, mode="collocated")

    def interference(n: int, e: int) -> List[Tuple[float, Affine]]:
        l = labels[n]
        squares = []
        for j in range(N):
            same = labels[j] == l
            w = zeta[n] if same and rank[j] > rank[n] else 1.0
            coherent = k_eff * g[e] if same and j != n else 0.0
            squares.append((w * scale ** 2 * (coherent + b[e] - g[e]), Affine.var(x[j])))
        return squares

    rho_k = np.asarray(point.rho_hat, dtype=float)
    for p, (n, e) in enumerate(pairs):
        rk, tk = rho_k[n], point.theta[(n, e)]
        prog.add_squares_bound(interference(n, e), Affine.var(theta[p]), name=f"interference_{n}_{e}")
        surrogate = k_eff * g[e] * (
            Affine.var(x[n], 2.0 * rk * scale / (tk + 1.0)) - rk ** 2 / (tk + 1.0) ** 2 * (Affine.var(theta[p]) + 1.0)
        )
        prog.add_linear(Affine.var(phi[n]) - surrogate, name=f"sinr_{n}_{e}")

    for n in range(N):
        rk, tk = rho_k[n], point.theta[(n, n)]
        bound = (
            Affine.var(x[n], 2.0 * (tk + 1.0) * scale / rk)
            - Affine.var(phi[n], (tk + 1.0) ** 2 / (k_eff * g[n] * rk ** 2))
            - 1.0
        )
        prog.add_squares_bound(interference(n, n), bound, name=f"own_{n}")

    _add_common(prog, point, clustering, config, x, np.array([np.sqrt(total) / scale]))

    _verify_point(prog, {
        "rho_hat": rho_k / scale,
        **_rate_values(np.asarray(point.phi, dtype=float)),
        "theta": [point.theta[pair] for pair in pairs],
    })
    return prog


# --------------
# Initial Point
# --------------
def tight_point(
    rho_hat: ArrayLike, gamma: ArrayLike, beta: ArrayLike, clustering: Clustering, config: SystemConfig,
) -> SurrogatePoint:
    """Expansion point whose auxiliary values are the exact amplitudes, interference powers and SINRs at rho_hat."""
    r_hat = np.asarray(rho_hat, dtype=float)
    mode: Mode = "cellfree" if r_hat.ndim == 2 else "collocated"
    g, b = _validated_inputs(gamma, beta, clustering, config, mode)
    k_eff = config.effective_antennas
    terms = cellfree_terms if mode == "cellfree" else collocated_terms
    coherent, noncoherent = terms(r_hat ** 2, g, b, k_eff)

    point = SurrogatePoint(rho_hat=r_hat, phi=np.zeros(clustering.num_ues), theta={})
    for cluster in clustering.clusters:
        for pos, n in enumerate(cluster):
            sinrs = []
            for e in cluster[:pos + 1]:
                bd = breakdown(coherent, noncoherent, clustering, config.zeta, n, e)
                point.theta[(n, e)] = bd.bu + bd.ici + bd.rici + bd.ui
                if mode == "cellfree":
                    point.varpi[(n, e)] = float(np.sqrt(bd.ds / k_eff))
                    if e != n:
                        point.tau[(n, e)] = point.varpi[(n, e)]
                sinrs.append(bd.sinr)
            point.phi[n] = min(sinrs)
    return point


def initial_point(
    config: SystemConfig, gamma: ArrayLike, beta: ArrayLike, clustering: Clustering, seed: SeedLike = None,
) -> SurrogatePoint:
    """
    Feasible starting point: 90% of the fractional fixed allocation (or, with a seed,
    a random allocation at 90% of every budget, sorted into SIC order), with tight
    auxiliary values.
    """
    g = np.asarray(gamma, dtype=float)
    if seed is None:
        rho = INITIAL_SHARE * np.asarray(fixed_pa(g, clustering, config).rho)
    else:
        rng = np.random.default_rng(seed)
        collocated = g.ndim == 1
        budgets = np.atleast_1d(config.power_budgets.sum() if collocated else config.power_budgets)
        weights = rng.uniform(0.1, 1.0, size=np.atleast_2d(g).shape)
        for cluster in clustering.clusters:
            weights[:, cluster] = np.sort(weights[:, cluster], axis=1)
        rho = INITIAL_SHARE * budgets[:, None] * weights / weights.sum(axis=1, keepdims=True)
        rho = rho[0] if collocated else rho
    return tight_point(np.sqrt(rho), g, beta, clustering, config)


# --------------------
# Iterative Algorithm
# --------------------
def _usable(solution: ConicSolution) -> bool:
    if solution.status == "optimal":
        return True
    return (
        solution.status == "max_iters"
        and solution.primal_residual <= 1e-6
        and solution.dual_residual <= 1e-6
        and solution.duality_gap <= 1e-6 * (1.0 + abs(solution.objective_value))
    )


def project_allocation(
    rho_hat: ArrayLike, clustering: Clustering, config: SystemConfig, mode: Mode,
) -> np.ndarray:
    """
    Powers from square-root powers: negatives clamped to zero, SIC order restored
    by a running maximum along each cluster, and any AP over budget rescaled onto it.
    """
    r_hat = np.atleast_2d(np.asarray(rho_hat, dtype=float)).copy()
    if np.any(r_hat < -1e-10 * max(1.0, float(np.abs(r_hat).max()))):
        error_logger.warning("IA: clamping negative square-root powers down to %.3e", float(r_hat.min()))
    r_hat = np.maximum(r_hat, 0.0)
    for cluster in clustering.clusters:
        r_hat[:, cluster] = np.maximum.accumulate(r_hat[:, cluster], axis=1)
    rho = r_hat ** 2
    budgets = np.atleast_1d(config.power_budgets.sum() if mode == "collocated" else config.power_budgets)
    totals = rho.sum(axis=1)
    over = totals > budgets
    rho[over] *= (budgets[over] / totals[over])[:, None]
    return rho[0] if mode == "collocated" else rho


def ia_maximize(
    config: SystemConfig,
    gamma: ArrayLike,
    beta: ArrayLike,
    clustering: Clustering,
    mode: Optional[Mode] = None,
    epsilon: Optional[float] = None,
    max_outer: Optional[int] = None,
    seed: SeedLike = None,
) -> Tuple[PowerAllocation, IaHistory]:
    """
    Maximize the sum SE by solving a sequence of inner-approximation subproblems.

    Parameters:
    - config (SystemConfig): the cell-free config, or the collocated one for mode "collocated"
    - gamma, beta: M x N (cell-free) or length N (collocated)
    - clustering (Clustering): decode-ordered clusters
    - mode (str, optional): "cellfree" or "collocated"; inferred from gamma when omitted
    - epsilon (float, optional): stop once the relative objective gain drops below it (settings.IA_EPSILON)
    - max_outer (int, optional): subproblem cap (settings.IA_MAX_OUTER)
    - seed (optional): start from a seeded random allocation instead of the fixed one

    Returns:
    - allocation (PowerAllocation): projected powers
    - history (IaHistory): objective per iterate, stopping reason and final sum SE
    """
    g = np.asarray(gamma, dtype=float)
    mode = mode or ("cellfree" if g.ndim == 2 else "collocated")
    epsilon = settings.IA_EPSILON if epsilon is None else epsilon
    max_outer = settings.IA_MAX_OUTER if max_outer is None else max_outer
    if epsilon <= 0:
        raise InvalidInputError("epsilon must be positive")
    if max_outer < 1:
        raise InvalidInputError("max_outer must be at least 1")
    g, b = _validated_inputs(g, beta, clustering, config, mode)

    if float(config.power_budgets.sum()) <= 0:
        rho = np.zeros_like(g)
        history = IaHistory(objectives=[0.0], status="zero_budget", rho=np.atleast_2d(rho).tolist())
        return PowerAllocation(mode=mode, rho=rho), history

    build: Callable[..., ConicProgram] = build_cf_subproblem if mode == "cellfree" else build_co_subproblem
    point = initial_point(config, g, b, clustering, seed=seed)
    if mode == "cellfree":
        msg_logger.debug(
            "IA: %d variables per subproblem, worst-case cost %.3g",
            reference_variable_count(clustering, g.shape[0]), subproblem_cost(clustering, g.shape[0]),
        )
    objectives = [float(config.prelog * np.log2(1.0 + point.phi).sum())]
    best = point.rho_hat
    status = "max_outer"

    for k in range(1, max_outer + 1):
        try:
            prog = build(point, g, b, clustering, config)
        except InvalidPointError:
            if k == 1:
                raise
            error_logger.warning("IA: expansion point rejected at iteration %d, keeping the best iterate", k)
            status = "subproblem_failed"
            break
        try:
            solution = solve_conic(prog)
        except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
            error_logger.warning("IA: subproblem %d failed (%s), keeping the best iterate", k, exc)
            status = "subproblem_failed"
            break
        if k == 1 and solution.status in ("infeasible", "unbounded"):
            error_logger.error("IA: first subproblem is %s", solution.status)
            raise InitializationError(f"the first subproblem could not be solved (status {solution.status})")
        if not _usable(solution):
            error_logger.warning("IA: subproblem %d ended with status %s, keeping the best iterate", k, solution.status)
            status = "subproblem_failed"
            break

        value = -solution.objective_value
        if value < objectives[-1] - MONOTONE_SLACK:
            error_logger.warning("IA: objective decreased from %.9g to %.9g at iteration %d", objectives[-1], value, k)
        scale = float(prog.meta["scale"])
        best = prog.extract(solution.x, "rho_hat") * scale
        objectives.append(value)
        msg_logger.debug("IA iteration %d: objective %.6f (%d solver iterations)", k, value, solution.iterations)

        previous = objectives[-2]
        if (value - previous) / max(abs(previous), 1e-12) < epsilon:
            status = "converged"
            break
        point = tight_point(np.maximum(best, RHO_FLOOR * scale), g, b, clustering, config)

    rho = project_allocation(best, clustering, config, mode)
    sse = sum_se_cf if mode == "cellfree" else sum_se_co
    history = IaHistory(
        objectives=objectives,
        iterations=len(objectives) - 1,
        status=status,
        final_sse=sse(rho, g, b, clustering, config),
        rho=np.atleast_2d(rho).tolist(),
    )
    return PowerAllocation(mode=mode, rho=rho), history
