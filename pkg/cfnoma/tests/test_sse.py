import numpy as np
import pytest

from cfnoma.core.errors import InvalidConfigError, InvalidInputError
from cfnoma.domain.network import estimation_stats
from cfnoma.domain.sse import (
    PowerAllocation,
    eta_coeff,
    fixed_pa,
    sinr_cf,
    sinr_co,
    sum_se_cf,
    sum_se_co,
    user_se_cf,
    user_se_co,
    user_se_vector_cf,
    user_se_vector_co,
)
from cfnoma.schemas.clustering import Clustering
from cfnoma.schemas.system import SystemConfig

from .conftest import desk_config, desk_instance


# --------------
# SIC Weighting
# --------------
def test_eta_other_cluster_counts_fully():
    assert eta_coeff(1, 3, 0, 0, 0.05) == 1.0


def test_eta_stronger_or_equal_counts_fully():
    assert eta_coeff(0, 0, 0, 1, 0.05) == 1.0
    assert eta_coeff(0, 1, 0, 1, 0.05) == 1.0


def test_eta_weaker_leaves_residual():
    assert eta_coeff(0, 2, 0, 1, 0.05) == 0.05


# ---------
# Cell-Free
# ---------
def test_single_ue_sinr(single_ue):
    config, beta, clustering, gamma = single_ue
    bd = sinr_cf(0, 0, np.array([[1.0]]), gamma, beta, clustering, config)
    assert gamma[0, 0] == pytest.approx(0.5)
    assert bd.ds == pytest.approx(0.5)
    assert bd.bu == pytest.approx(0.5)
    assert bd.ici == bd.rici == bd.ui == 0.0
    assert bd.sinr == pytest.approx(1.0 / 3.0)


def test_single_ue_se(single_ue):
    config, beta, clustering, gamma = single_ue
    se = user_se_cf(0, np.array([[1.0]]), gamma, beta, clustering, config)
    assert se == pytest.approx(0.5 * np.log2(4.0 / 3.0))
    assert se == pytest.approx(0.2075, abs=1e-4)
    assert sum_se_cf(np.array([[1.0]]), gamma, beta, clustering, config) == pytest.approx(se)


def test_zero_power_gives_zero_sinr(desk):
    config, beta, clustering, gamma = desk
    zero = np.zeros_like(beta)
    assert sinr_cf(0, 0, zero, gamma, beta, clustering, config).sinr == 0.0
    assert sum_se_cf(zero, gamma, beta, clustering, config) == 0.0


def test_zf_dimension_is_required(single_ue):
    _, beta, clustering, gamma = single_ue
    config = SystemConfig(num_aps=1, num_ues=1, num_antennas=1, num_clusters=1, ul_pilot_power=1.0, dl_power_budget=4.0)
    with pytest.raises(InvalidConfigError):
        sinr_cf(0, 0, np.array([[1.0]]), gamma, beta, clustering, config)


def test_full_pilot_prelog_kills_se():
    config = SystemConfig(
        num_aps=1, num_ues=1, num_antennas=2, num_clusters=1, coherence_len=1,
        ul_pilot_power=1.0, dl_power_budget=4.0,
    )
    beta = np.array([[1.0]])
    clustering = Clustering(clusters=[[0]])
    gamma, _ = estimation_stats(beta, clustering, config)
    assert user_se_cf(0, np.array([[1.0]]), gamma, beta, clustering, config) == 0.0


def test_strongest_ue_uses_own_sinr_only(desk):
    config, beta, clustering, gamma = desk
    rho = fixed_pa(gamma, clustering, config).rho
    se = user_se_vector_cf(rho, gamma, beta, clustering, config)
    for cluster in clustering.clusters:
        n = cluster[0]
        own = sinr_cf(n, n, rho, gamma, beta, clustering, config).sinr
        assert se[n] == pytest.approx(config.prelog * np.log2(1.0 + own))


def test_weak_ue_is_limited_by_every_decoder(desk):
    config, beta, clustering, gamma = desk
    rho = fixed_pa(gamma, clustering, config).rho
    se = user_se_vector_cf(rho, gamma, beta, clustering, config)
    for cluster in clustering.clusters:
        for pos, n in enumerate(cluster):
            for e in cluster[: pos + 1]:
                sinr = sinr_cf(n, e, rho, gamma, beta, clustering, config).sinr
                assert se[n] <= config.prelog * np.log2(1.0 + sinr) + 1e-12


def test_weaker_ue_cannot_decode_stronger(desk):
    config, beta, clustering, gamma = desk
    cluster = next(c for c in clustering.clusters if len(c) > 1)
    with pytest.raises(InvalidInputError):
        sinr_cf(cluster[0], cluster[1], fixed_pa(gamma, clustering, config).rho, gamma, beta, clustering, config)


def test_symmetric_clusters_contribute_equally():
    config = SystemConfig(
        num_aps=2, num_ues=2, num_antennas=4, num_clusters=2, ul_pilot_power=1.0, dl_power_budget=2.0,
    )
    beta = np.array([[1.0, 0.5], [0.5, 1.0]])
    clustering = Clustering(clusters=[[0], [1]])
    gamma, _ = estimation_stats(beta, clustering, config)
    rho = fixed_pa(gamma, clustering, config).rho
    se = user_se_vector_cf(rho, gamma, beta, clustering, config)
    assert se[0] == pytest.approx(se[1], rel=1e-12)
    assert sum_se_cf(rho, gamma, beta, clustering, config) == pytest.approx(2.0 * se[0])


def test_more_residual_interference_lowers_se(desk):
    config, beta, clustering, gamma = desk
    rho = fixed_pa(gamma, clustering, config).rho
    perfect = sum_se_cf(rho, gamma, beta, clustering, config.with_updates(sic_coeff=0.0))
    broken = sum_se_cf(rho, gamma, beta, clustering, config.with_updates(sic_coeff=1.0))
    assert perfect >= broken


# ----------
# Collocated
# ----------
def test_cellfree_with_one_ap_equals_collocated():
    rng = np.random.default_rng(7)
    for _ in range(100):
        N = int(rng.integers(2, 7))
        L = int(rng.integers(1, N + 1))
        labels = np.concatenate([np.arange(L), rng.integers(0, L, size=N - L)])
        rng.shuffle(labels)
        clustering = Clustering(clusters=[np.flatnonzero(labels == l).tolist() for l in range(L)])
        config = SystemConfig(
            num_aps=1, num_ues=N, num_antennas=L + int(rng.integers(1, 8)), num_clusters=L,
            sic_coeff=float(rng.uniform(0, 1)), ul_pilot_power=float(rng.uniform(1, 100)), dl_power_budget=10.0,
        )
        beta = rng.uniform(0.1, 2.0, size=(1, N))
        gamma, _ = estimation_stats(beta, clustering, config)
        rho = rng.uniform(0.0, 5.0, size=(1, N))
        cf = user_se_vector_cf(rho, gamma, beta, clustering, config)
        co = user_se_vector_co(rho[0], gamma[0], beta[0], clustering, config.collocated())
        np.testing.assert_allclose(cf, co, rtol=1e-12, atol=1e-15)


def test_collocated_zero_power_and_single_ue(single_ue):
    config, beta, clustering, gamma = single_ue
    assert sum_se_co(np.zeros(1), gamma[0], beta[0], clustering, config) == 0.0
    values = [
        user_se_co(0, np.array([4.0]), gamma[0], beta[0], clustering, config.with_updates(sic_coeff=z))
        for z in (0.0, 0.5, 1.0)
    ]
    assert values[0] == values[1] == values[2]
    assert sinr_co(0, 0, np.array([1.0]), gamma[0], beta[0], clustering, config).sinr == pytest.approx(1.0 / 3.0)


def test_collocated_shape_is_checked(single_ue):
    config, beta, clustering, gamma = single_ue
    with pytest.raises(InvalidInputError):
        user_se_vector_co(np.ones((1, 1)), gamma, beta, clustering, config)


# ---------------------------
# Fractional Power Allocation
# ---------------------------
def test_zero_exponent_splits_equally():
    config = SystemConfig(num_aps=1, num_ues=2, num_antennas=4, num_clusters=1, pilot_len=2,
                          ul_pilot_power=1.0, dl_power_budget=6.0)
    clustering = Clustering(clusters=[[0, 1]])
    rho = fixed_pa(np.array([[4.0, 1.0]]), clustering, config, alpha=0.0).rho
    np.testing.assert_allclose(rho, [[3.0, 3.0]])


def test_weaker_ue_gets_more_power():
    config = SystemConfig(num_aps=1, num_ues=2, num_antennas=4, num_clusters=1, pilot_len=2,
                          ul_pilot_power=1.0, dl_power_budget=1.0)
    clustering = Clustering(clusters=[[0, 1]])
    rho = fixed_pa(np.array([[4.0, 1.0]]), clustering, config, alpha=1.0).rho
    np.testing.assert_allclose(rho, [[0.2, 0.8]])


def test_lone_ue_gets_whole_budget(single_ue):
    config, _, clustering, gamma = single_ue
    allocation = fixed_pa(gamma, clustering, config)
    np.testing.assert_allclose(allocation.rho, [[4.0]])
    assert allocation.mode == "cellfree"


def test_fixed_pa_is_a_valid_allocation(desk):
    config, _, clustering, gamma = desk
    allocation = fixed_pa(gamma, clustering, config)
    assert allocation.violations(config, clustering) == []
    np.testing.assert_allclose(allocation.total_per_ap, config.power_budgets)


def test_collocated_fixed_pa_uses_summed_budget():
    config = desk_config()
    _, beta, clustering, gamma = desk_instance(3)
    allocation = fixed_pa(np.linalg.norm(gamma, axis=0), clustering, config)
    assert allocation.mode == "collocated"
    assert allocation.rho.sum() == pytest.approx(config.power_budgets.sum())


def test_violations_report_problems():
    config = SystemConfig(num_aps=1, num_ues=2, num_antennas=4, num_clusters=1, pilot_len=2,
                          ul_pilot_power=1.0, dl_power_budget=1.0)
    clustering = Clustering(clusters=[[0, 1]])
    problems = PowerAllocation(mode="cellfree", rho=np.array([[0.9, 0.3]])).violations(config, clustering)
    assert any("budget" in p for p in problems)
    assert any("decrease" in p for p in problems)


def test_negative_exponent_is_rejected(single_ue):
    config, _, clustering, gamma = single_ue
    with pytest.raises(InvalidInputError):
        fixed_pa(gamma, clustering, config, alpha=-1.0)
