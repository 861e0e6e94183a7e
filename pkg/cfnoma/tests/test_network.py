import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cfnoma.core.errors import InvalidClusteringError, InvalidInputError
from cfnoma.domain.network import (
    Topology,
    build_fading_map,
    collocated_fading,
    estimation_stats,
    generate_topology,
    large_scale_fading,
    path_loss,
    sample_disc,
)
from cfnoma.schemas.clustering import Clustering
from cfnoma.schemas.system import SystemConfig

from .conftest import desk_config


# ---------
# Path Loss
# ---------
@pytest.mark.parametrize(
    "d, expected",
    [(1.0, -140.7), (0.05, -95.164), (0.005, -81.185)],
)
def test_path_loss_three_slopes(d, expected):
    assert path_loss(d, 0.01, 0.05) == pytest.approx(expected, abs=1e-3)


def test_path_loss_is_continuous_at_knees():
    for knee in (0.01, 0.05):
        assert path_loss(knee * (1 - 1e-9)) == pytest.approx(path_loss(knee), abs=1e-6)


def test_path_loss_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        path_loss(0.0)
    with pytest.raises(InvalidInputError):
        path_loss(1.0, d0=0.05, d1=0.01)


@given(st.floats(min_value=0.01, max_value=5.0), st.floats(min_value=1.0001, max_value=3.0))
def test_path_loss_decreases_with_distance(d, factor):
    assert path_loss(d * factor) < path_loss(d)


# --------
# Topology
# --------
def test_empty_disc_sample():
    assert sample_disc(0, 1.0, np.random.default_rng(0)).shape == (0, 2)


def test_topology_inside_disc_and_deterministic():
    config = desk_config(num_aps=32, num_ues=10, num_clusters=5)
    a = generate_topology(config, 5)
    b = generate_topology(config, 5)
    assert np.all(np.linalg.norm(a.ap_positions, axis=1) <= 1.0)
    assert np.all(np.linalg.norm(a.ue_positions, axis=1) <= 1.0)
    np.testing.assert_array_equal(a.ap_positions, b.ap_positions)
    np.testing.assert_array_equal(a.ue_positions, b.ue_positions)


# ------------------
# Large-Scale Fading
# ------------------
def test_fading_without_shadowing_follows_path_loss():
    config = desk_config(shadow_std=0.0)
    topo = generate_topology(config, 1)
    beta = large_scale_fading(topo, config, 2)
    distances = np.linalg.norm(topo.ap_positions[:, None, :] - topo.ue_positions[None, :, :], axis=2)
    expected = 10.0 ** (path_loss(np.maximum(distances, config.min_distance)) / 10.0)
    np.testing.assert_allclose(beta, expected, rtol=1e-12)


def test_fading_at_one_km_without_shadowing():
    config = desk_config(num_aps=1, num_ues=1, num_clusters=1, shadow_std=0.0)
    topo = Topology(ap_positions=np.array([[0.0, 0.0]]), ue_positions=np.array([[1.0, 0.0]]))
    assert large_scale_fading(topo, config, 0)[0, 0] == pytest.approx(10.0 ** -14.07, rel=1e-12)


def test_fading_is_seeded():
    config = desk_config()
    topo = generate_topology(config, 3)
    np.testing.assert_array_equal(large_scale_fading(topo, config, 4), large_scale_fading(topo, config, 4))
    assert collocated_fading(topo, config, 4).shape == (config.num_ues,)


# ---------------
# MMSE Statistics
# ---------------
def _unit_config(num_ues: int, num_clusters: int, pilot_len: int) -> SystemConfig:
    return SystemConfig(
        num_aps=1, num_ues=num_ues, num_antennas=4, num_clusters=num_clusters,
        pilot_len=pilot_len, ul_pilot_power=1.0, dl_power_budget=1.0,
    )


def test_singleton_cluster_estimate_variance():
    gamma, upsilon = estimation_stats(np.array([[1.0]]), Clustering(clusters=[[0]]), _unit_config(1, 1, 1))
    assert gamma[0, 0] == pytest.approx(0.5)
    assert upsilon[0, 0] == pytest.approx(0.5)


def test_shared_pilot_estimate_variance():
    gamma, _ = estimation_stats(np.ones((1, 2)), Clustering(clusters=[[0, 1]]), _unit_config(2, 1, 2))
    np.testing.assert_allclose(gamma, [[0.4, 0.4]])


def test_vector_input_returns_vectors():
    gamma, upsilon = estimation_stats(np.ones(2), Clustering(clusters=[[0, 1]]), _unit_config(2, 1, 2))
    assert gamma.shape == upsilon.shape == (2,)


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_estimate_variance_below_beta(seed):
    config = desk_config()
    topo = generate_topology(config, seed)
    beta = large_scale_fading(topo, config, seed + 1)
    clustering = Clustering(clusters=[[0, 1], [2, 3], [4, 5]])
    fading = build_fading_map(beta, clustering, config)
    assert np.all(fading.gamma > 0)
    assert np.all(fading.gamma < fading.beta)


def test_estimation_rejects_bad_partition():
    with pytest.raises(InvalidClusteringError):
        estimation_stats(np.ones((1, 3)), Clustering(clusters=[[0, 1]]), _unit_config(3, 1, 1))


def test_estimation_needs_enough_pilots():
    clustering = Clustering(clusters=[[0], [1]])
    config = _unit_config(2, 1, 1)
    with pytest.raises(InvalidClusteringError):
        estimation_stats(np.ones((1, 2)), clustering, config)


def test_config_rejects_short_pilot():
    with pytest.raises(ValueError):
        _unit_config(2, 2, 1)
