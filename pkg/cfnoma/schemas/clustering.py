from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class Clustering(BaseModel):
    """
    Partition of the UEs into NOMA clusters.

    Each inner list of `clusters` is in decode order, strongest UE first.
    Cluster l uses pilot l.
    """
    model_config = ConfigDict(
        frozen=True,
        json_schema_extra={
            "examples": [
                {"clusters": [[2, 0], [1, 3]], "centroids": [[1.5e-12, 2.0e-13], [3.1e-13, 9.0e-12]]}
            ]
        },
    )

    clusters: List[List[int]] = Field(description="UE indices per cluster, strongest first.")
    centroids: List[List[float]] = Field(default_factory=list, description="Feature-space centroid per cluster.")
    objective_trace: List[float] = Field(
        default_factory=list,
        exclude=True,
        description="Within-cluster sum of squares after every Lloyd iteration.",
    )

    @model_validator(mode="after")
    def _check(self) -> "Clustering":
        members = [n for cluster in self.clusters for n in cluster]
        if any(n < 0 for n in members):
            raise ValueError("UE indices must be non-negative")
        if len(set(members)) != len(members):
            raise ValueError("clusters must be disjoint")
        if any(len(cluster) == 0 for cluster in self.clusters):
            raise ValueError("clusters must be non-empty")
        if self.centroids and len(self.centroids) != len(self.clusters):
            raise ValueError("one centroid per cluster is required")
        return self

    @property
    def num_clusters(self) -> int:
        return len(self.clusters)

    @property
    def num_ues(self) -> int:
        return sum(len(cluster) for cluster in self.clusters)

    @property
    def assignment(self) -> np.ndarray:
        """Cluster index of every UE."""
        labels = np.full(self.num_ues, -1, dtype=int)
        for l, cluster in enumerate(self.clusters):
            labels[cluster] = l
        return labels

    @property
    def rank(self) -> np.ndarray:
        """Decode position of every UE inside its cluster (0 = strongest)."""
        pos = np.zeros(self.num_ues, dtype=int)
        for cluster in self.clusters:
            pos[cluster] = np.arange(len(cluster))
        return pos

    def covers(self, num_ues: int) -> bool:
        members = sorted(n for cluster in self.clusters for n in cluster)
        return members == list(range(num_ues))
