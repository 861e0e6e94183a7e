import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfnoma.core.errors import InitializationError, InvalidPointError
from cfnoma.domain import solver as solver_module
from cfnoma.domain.conic import ConicSolution, solve_conic
from cfnoma.domain.solver import (
    SurrogatePoint,
    build_cf_subproblem,
    build_co_subproblem,
    constraint_blocks,
    decode_pairs,
    ia_maximize,
    initial_point,
    log_surrogate,
    project_allocation,
    ratio_surrogate,
    reference_constraint_count,
    reference_variable_count,
    subproblem_cost,
    tight_point,
    weighted_constraint_count,
)
from cfnoma.domain.clustering import order_within_cluster
from cfnoma.domain.network import estimation_stats
from cfnoma.domain.sse import fixed_pa, sinr_cf, sum_se_cf
from cfnoma.schemas.clustering import Clustering
from cfnoma.schemas.system import SystemConfig

from .conftest import desk_instance

positive = st.floats(min_value=1e-3, max_value=1e3)


# ------------
# Decode Pairs
# ------------
def test_decode_pairs_follow_sic_order():
    clustering = Clustering(clusters=[[0, 1, 2], [3]])
    assert decode_pairs(clustering) == [(1, 0), (2, 0), (2, 1)]


def test_reference_tallies():
    clustering = Clustering(clusters=[[0, 1], [2, 3]])
    assert reference_variable_count(clustering, 2) == 4 * 2 + 3 * 4 + 3 * 2
    assert reference_constraint_count(clustering, 2) == 8 * (2 * (1 + 2)) + 2


# -----------------
# Surrogate Bounds
# -----------------
@settings(max_examples=1000, deadline=None)
@given(positive, positive)
def test_log_surrogate_is_a_tight_lower_bound(phi, phi_k):
    assert log_surrogate(phi, phi_k) <= np.log1p(phi) + 1e-9
    assert log_surrogate(phi_k, phi_k) == pytest.approx(np.log1p(phi_k))


@settings(max_examples=1000, deadline=None)
@given(positive, st.floats(min_value=0.0, max_value=1e3), positive, st.floats(min_value=0.0, max_value=1e3))
def test_ratio_surrogate_is_a_tight_lower_bound(varpi, theta, varpi_k, theta_k):
    exact = 4 * varpi ** 2 / (theta + 1.0)
    assert ratio_surrogate(varpi, theta, varpi_k, theta_k, 4) <= exact * (1 + 1e-9) + 1e-9
    assert ratio_surrogate(varpi_k, theta_k, varpi_k, theta_k, 4) == pytest.approx(4 * varpi_k ** 2 / (theta_k + 1.0))


def test_hyperbolic_cone_is_tight_at_reciprocals(single_ue):
    config, beta, clustering, gamma = single_ue
    prog = build_cf_subproblem(initial_point(config, gamma, beta, clustering), gamma, beta, clustering, config)
    cone = next(c for c in prog.socs if c.name == "hyperbolic_0")
    x = np.zeros(prog.num_vars)
    x[prog.variables["phi"][0]] = 2.0
    x[prog.variables["phi_bar"][0]] = 0.5
    lhs = np.linalg.norm([r.value(x) for r in cone.rows])
    assert lhs == pytest.approx(1.25)
    assert cone.bound.value(x) == pytest.approx(1.25)


# -----------------
# Subproblem Shape
# -----------------
def test_cellfree_variable_count(desk):
    config, beta, clustering, gamma = desk
    prog = build_cf_subproblem(initial_point(config, gamma, beta, clustering), gamma, beta, clustering, config)
    assert prog.num_vars == reference_variable_count(clustering, config.num_aps)
    pairs = len(decode_pairs(clustering))
    N, M = config.num_ues, config.num_aps
    assert prog.num_constraints == 4 * pairs + 3 * N + M + M * N
    assert prog.constraint_families()["order"] == M * (N - len(clustering.clusters))


@pytest.mark.parametrize("shape_seed", range(5))
def test_subproblem_tallies_on_random_shapes(shape_seed):
    rng = np.random.default_rng(100 + shape_seed)
    L = int(rng.integers(1, 4))
    N = int(rng.integers(L, 3 * L + 1))
    M = int(rng.integers(2, 7))
    config, beta, clustering, gamma = desk_instance(shape_seed, num_aps=M, num_ues=N, num_clusters=L)
    prog = build_cf_subproblem(initial_point(config, gamma, beta, clustering), gamma, beta, clustering, config)

    sizes = [len(c) for c in clustering.clusters]
    pairs = sum(s * (s - 1) // 2 for s in sizes)
    c = 8 * sum(s * (s - 1) // 2 + M * (s - 1) for s in sizes) + M
    assert prog.num_vars == N * M + 3 * N + 3 * pairs
    assert reference_constraint_count(clustering, M) == c
    assert weighted_constraint_count(prog) == c
    blocks = constraint_blocks(clustering, M)
    assert prog.constraint_families() == blocks
    assert prog.num_constraints == sum(blocks.values())


def test_worst_case_cost_grows_with_the_deployment():
    costs = []
    for n_ues in (4, 6, 8, 10):
        config, beta, clustering, gamma = desk_instance(7, num_ues=n_ues, num_clusters=n_ues // 2)
        prog = build_cf_subproblem(initial_point(config, gamma, beta, clustering), gamma, beta, clustering, config)
        sol = solve_conic(prog)
        assert sol.status == "optimal"
        assert sol.iterations <= 60
        costs.append(subproblem_cost(clustering, config.num_aps))
    assert costs == sorted(costs)
    assert len(set(costs)) == len(costs)


def test_collocated_variable_count(desk):
    config, beta, clustering, _ = desk
    beta_co = beta.sum(axis=0)
    co = config.collocated()
    gamma_co, _ = estimation_stats(beta_co, clustering, co)
    clustering = order_within_cluster(gamma_co, clustering)
    prog = build_co_subproblem(initial_point(co, gamma_co, beta_co, clustering), gamma_co, beta_co, clustering, co)
    assert prog.num_vars == 4 * config.num_ues + len(decode_pairs(clustering))


def test_initial_point_is_feasible_and_tight(desk):
    config, beta, clustering, gamma = desk
    point = initial_point(config, gamma, beta, clustering)
    prog = build_cf_subproblem(point, gamma, beta, clustering, config)
    rho = point.rho_hat ** 2
    np.testing.assert_allclose(rho, 0.9 * fixed_pa(gamma, clustering, config).rho)
    assert config.prelog * np.log2(1.0 + point.phi).sum() == pytest.approx(sum_se_cf(rho, gamma, beta, clustering, config))
    assert prog.meta["pairs"] == decode_pairs(clustering)


def test_single_ue_initial_sinr(single_ue):
    config, beta, clustering, gamma = single_ue
    point = initial_point(config, gamma, beta, clustering)
    assert point.phi[0] == pytest.approx(sinr_cf(0, 0, np.array([[3.6]]), gamma, beta, clustering, config).sinr)


def test_initial_point_is_deterministic(desk):
    config, beta, clustering, gamma = desk
    a = initial_point(config, gamma, beta, clustering)
    b = initial_point(config, gamma, beta, clustering)
    np.testing.assert_array_equal(a.rho_hat, b.rho_hat)
    c = initial_point(config, gamma, beta, clustering, seed=5)
    d = initial_point(config, gamma, beta, clustering, seed=5)
    np.testing.assert_array_equal(c.rho_hat, d.rho_hat)
    build_cf_subproblem(c, gamma, beta, clustering, config)


def test_infeasible_point_is_rejected(desk):
    config, beta, clustering, gamma = desk
    point = initial_point(config, gamma, beta, clustering)
    inflated = SurrogatePoint(
        rho_hat=point.rho_hat, phi=point.phi * 10.0, theta=point.theta, varpi=point.varpi, tau=point.tau,
    )
    with pytest.raises(InvalidPointError):
        build_cf_subproblem(inflated, gamma, beta, clustering, config)


def test_incomplete_point_is_rejected(desk):
    config, beta, clustering, gamma = desk
    point = initial_point(config, gamma, beta, clustering)
    with pytest.raises(InvalidPointError):
        build_cf_subproblem(SurrogatePoint(rho_hat=point.rho_hat, phi=point.phi, theta={}), gamma, beta, clustering, config)


# --------------------
# Subproblem Optimum
# --------------------
def test_single_ue_takes_the_whole_budget(single_ue):
    config, beta, clustering, gamma = single_ue
    prog = build_cf_subproblem(initial_point(config, gamma, beta, clustering), gamma, beta, clustering, config)
    sol = solve_conic(prog)
    assert sol.status == "optimal"
    assert prog.extract(sol.x, "rho_hat")[0, 0] * prog.meta["scale"] == pytest.approx(2.0, rel=1e-5)


def test_one_ap_cellfree_and_collocated_programs_agree():
    config, beta, clustering, gamma = desk_instance(21, num_aps=1, num_antennas=16)
    co = config.collocated()
    cf_prog = build_cf_subproblem(initial_point(config, gamma, beta, clustering), gamma, beta, clustering, config)
    co_prog = build_co_subproblem(
        initial_point(co, gamma[0], beta[0], clustering), gamma[0], beta[0], clustering, co,
    )
    cf_sol, co_sol = solve_conic(cf_prog), solve_conic(co_prog)
    assert cf_sol.status == co_sol.status == "optimal"
    assert cf_sol.objective_value == pytest.approx(co_sol.objective_value, rel=1e-6, abs=1e-6)


def test_epigraphs_are_tight_at_the_subproblem_optimum(desk):
    config, beta, clustering, gamma = desk
    point = initial_point(config, gamma, beta, clustering)
    prog = build_cf_subproblem(point, gamma, beta, clustering, config)
    sol = solve_conic(prog)
    assert sol.status == "optimal"
    phi = prog.extract(sol.x, "phi")
    phi_bar = prog.extract(sol.x, "phi_bar")
    rate = prog.extract(sol.x, "rate")
    pk = point.phi

    np.testing.assert_allclose(phi * phi_bar, 1.0, rtol=1e-4)
    bound = np.log1p(pk) + pk / (pk + 1.0) - pk ** 2 / (pk + 1.0) * phi_bar
    np.testing.assert_allclose(rate * np.log(2.0), bound, atol=1e-6)

    # the surrogate SINRs never overstate the exact ones at the returned powers
    rho_hat = np.maximum(prog.extract(sol.x, "rho_hat") * prog.meta["scale"], 0.0)
    exact = tight_point(rho_hat, gamma, beta, clustering, config).phi
    assert np.all(phi <= exact * (1 + 1e-6) + 1e-8)
    assert sum_se_cf(rho_hat ** 2, gamma, beta, clustering, config) >= -sol.objective_value - 1e-6
    assert -sol.objective_value >= config.prelog * np.log2(1.0 + pk).sum() - 1e-6


# ----------
# Projection
# ----------
def test_projection_repairs_order_sign_and_budget():
    config = SystemConfig(num_aps=1, num_ues=2, num_antennas=4, num_clusters=1, pilot_len=2,
                          ul_pilot_power=1.0, dl_power_budget=1.0)
    clustering = Clustering(clusters=[[0, 1]])
    rho = project_allocation(np.array([[-0.1, 0.5]]), clustering, config, "cellfree")
    np.testing.assert_allclose(rho, [[0.0, 0.25]])
    rho = project_allocation(np.array([[1.0, 0.5]]), clustering, config, "cellfree")
    np.testing.assert_allclose(rho, [[0.5, 0.5]])


# --------------------
# Inner Approximation
# --------------------
def test_single_ue_converges_to_full_budget(single_ue):
    config, beta, clustering, gamma = single_ue
    allocation, history = ia_maximize(config, gamma, beta, clustering)
    assert history.status == "converged"
    assert 1 <= history.iterations <= 3
    assert allocation.rho[0, 0] == pytest.approx(4.0, rel=1e-4)
    assert history.is_monotone()


def test_zero_budget_short_circuits(single_ue):
    config, beta, clustering, gamma = single_ue
    allocation, history = ia_maximize(config.with_updates(dl_power_budget=0.0), gamma, beta, clustering)
    assert history.status == "zero_budget"
    assert history.objectives == [0.0]
    np.testing.assert_array_equal(allocation.rho, [[0.0]])


@pytest.mark.parametrize("seed", range(31, 51))
def test_desk_scale_ia_is_monotone_and_beats_fixed_pa(seed):
    config, beta, clustering, gamma = desk_instance(seed)
    allocation, history = ia_maximize(config, gamma, beta, clustering, epsilon=1e-3, max_outer=10)
    assert history.is_monotone(1e-6)
    assert history.status == "converged"
    assert history.iterations <= 10
    assert allocation.violations(config, clustering) == []
    fixed = sum_se_cf(fixed_pa(gamma, clustering, config).rho, gamma, beta, clustering, config)
    assert history.final_sse >= fixed - 1e-6


def _failing_solver(monkeypatch, fail_on: int, outcome):
    """Replace the subproblem solver so call `fail_on` raises or returns `outcome`."""
    calls = []
    real = solver_module.solve_conic

    def solve(prog):
        calls.append(prog)
        if len(calls) != fail_on:
            return real(prog)
        if isinstance(outcome, Exception):
            raise outcome
        return ConicSolution(x=np.zeros(prog.num_vars), objective_value=np.nan, status=outcome, duality_gap=np.nan)

    monkeypatch.setattr(solver_module, "solve_conic", solve)
    return calls


def test_solver_breakdown_keeps_the_best_iterate(desk, monkeypatch):
    config, beta, clustering, gamma = desk
    _failing_solver(monkeypatch, 2, ValueError("array must not contain infs or NaNs"))
    allocation, history = ia_maximize(config, gamma, beta, clustering, epsilon=1e-9, max_outer=5)
    assert history.status == "subproblem_failed"
    assert history.iterations == 1
    assert allocation.violations(config, clustering) == []
    assert history.final_sse >= history.objectives[-1] - 1e-6


@pytest.mark.parametrize("outcome", [np.linalg.LinAlgError("singular matrix"), "max_iters"])
def test_first_subproblem_breakdown_returns_the_start(desk, monkeypatch, outcome):
    config, beta, clustering, gamma = desk
    _failing_solver(monkeypatch, 1, outcome)
    allocation, history = ia_maximize(config, gamma, beta, clustering)
    assert history.status == "subproblem_failed"
    assert history.iterations == 0
    np.testing.assert_allclose(allocation.rho, 0.9 * fixed_pa(gamma, clustering, config).rho)
    assert history.final_sse == pytest.approx(history.objectives[0])


@pytest.mark.parametrize("outcome", ["infeasible", "unbounded"])
def test_infeasible_first_subproblem_raises(desk, monkeypatch, outcome):
    config, beta, clustering, gamma = desk
    _failing_solver(monkeypatch, 1, outcome)
    with pytest.raises(InitializationError):
        ia_maximize(config, gamma, beta, clustering)


def test_history_frame(single_ue):
    config, beta, clustering, gamma = single_ue
    _, history = ia_maximize(config, gamma, beta, clustering)
    frame = history.to_frame()
    assert list(frame.columns) == ["iteration", "objective"]
    assert len(frame) == history.iterations + 1


def test_collocated_ia(desk):
    config, beta, clustering, _ = desk
    beta_co = beta.sum(axis=0)
    co = config.collocated()
    gamma_co, _ = estimation_stats(beta_co, clustering, co)
    clustering = order_within_cluster(gamma_co, clustering)
    allocation, history = ia_maximize(co, gamma_co, beta_co, clustering, max_outer=10)
    assert allocation.mode == "collocated"
    assert history.is_monotone(1e-6)
    assert allocation.rho.sum() <= co.power_budgets.sum() * (1 + 1e-9)
