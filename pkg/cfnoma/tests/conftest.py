import numpy as np
import pytest

from cfnoma.domain.clustering import cluster_users, order_within_cluster
from cfnoma.domain.network import estimation_stats, generate_topology, large_scale_fading
from cfnoma.schemas.clustering import Clustering
from cfnoma.schemas.scenario import dbm_to_normalized
from cfnoma.schemas.system import SystemConfig


def desk_config(**changes) -> SystemConfig:
    """M=8, N=6, K=8, L=3 at 40 dBm total, the small reference deployment."""
    values = dict(
        num_aps=8,
        num_ues=6,
        num_antennas=8,
        num_clusters=3,
        sic_coeff=0.05,
        ul_pilot_power=dbm_to_normalized(23.0, -104.0),
        dl_power_budget=dbm_to_normalized(40.0, -104.0) / 8,
    )
    values.update(changes)
    return SystemConfig(**values)


def desk_instance(seed: int, **changes):
    config = desk_config(**changes)
    root = np.random.SeedSequence(seed)
    topo_seed, fading_seed = root.spawn(2)
    beta = large_scale_fading(generate_topology(config, topo_seed), config, fading_seed)
    clustering = cluster_users(beta, config.num_clusters, "improved")
    gamma, _ = estimation_stats(beta, clustering, config)
    return config, beta, order_within_cluster(gamma, clustering), gamma


@pytest.fixture
def single_ue():
    """One AP, one UE, K=2, tau_p=1, beta=1, unit pilot power, budget 4."""
    config = SystemConfig(
        num_aps=1, num_ues=1, num_antennas=2, num_clusters=1,
        ul_pilot_power=1.0, dl_power_budget=4.0, coherence_len=2,
    )
    beta = np.array([[1.0]])
    clustering = Clustering(clusters=[[0]])
    gamma, _ = estimation_stats(beta, clustering, config)
    return config, beta, clustering, gamma


@pytest.fixture
def desk():
    return desk_instance(11)
