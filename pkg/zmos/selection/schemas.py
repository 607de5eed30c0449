"""
Cluster specifications that route utterances to component models.
"""


import enum
from typing import Any, Dict, List, Optional

import numpy as np
from pydantic import root_validator
from pydantic.types import confloat, conint

from ..schemas import ZmosModel
from ..type_helpers import FloatArray


@enum.unique
class Strategy(str, enum.Enum):
    """
    How training utterances are clustered, and test utterances routed.
    """

    QS = "qs"
    """
    By predicted quality score.
    """
    QE = "qe"
    """
    By quality embedding.
    """


class KMeansConfig(ZmosModel):
    """
    Parameters of k-means clustering.

    Attributes:
        max_iter: Maximum number of Lloyd iterations per run.
        tol: A run stops once no centroid moves further than this.
        n_init: Number of seeded runs. The one with the lowest inertia is
            kept.

    """

    max_iter: conint(gt=0) = 100
    tol: confloat(ge=0.0) = 1e-6
    n_init: conint(gt=0) = 10


class ClusterSpec(ZmosModel):
    """
    A partition of the training utterances, with the per-cluster
    statistics used to route new utterances.

    Attributes:
        strategy: The clustering strategy.
        num_clusters: The number of clusters.
        qs_means: Mean predicted score of each cluster, strictly increasing
            (QS only).
        qe_centroids: Centroid of each cluster, one row per cluster (QE
            only).
        assignments: The cluster index of every training utterance, by ID.
        seed: The seed the clustering was run with.
        qnet_sha256: Hash of the quality predictor checkpoint the scores or
            embeddings came from.

    """

    strategy: Strategy
    num_clusters: conint(ge=1)
    qs_means: Optional[List[float]] = None
    qe_centroids: Optional[List[List[float]]] = None
    assignments: Dict[str, int]
    seed: int = 0
    qnet_sha256: Optional[str] = None

    @root_validator(skip_on_failure=True)
    def statistics_match(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        """
        Ensures that the statistics match the strategy and cluster count.

        Args:
            values: The field values.

        Returns:
            The same values.

        """
        num_clusters = values["num_clusters"]
        means = values["qs_means"]
        centroids = values["qe_centroids"]
        if values["strategy"] == Strategy.QS:
            assert means is not None, "QS clusters need qs_means."
            assert centroids is None, "QS clusters can't have centroids."
            assert (
                len(means) == num_clusters
            ), f"Expected {num_clusters} means, got {len(means)}."
            assert all(np.isfinite(means)), "qs_means must be finite."
            assert all(
                a < b for a, b in zip(means, means[1:])
            ), "qs_means must be strictly increasing."
        else:
            assert centroids is not None, "QE clusters need qe_centroids."
            assert means is None, "QE clusters can't have means."
            assert (
                len(centroids) == num_clusters
            ), f"Expected {num_clusters} centroids, got {len(centroids)}."
            assert (
                len({len(c) for c in centroids}) == 1 and centroids[0]
            ), "Centroids must share one non-zero dimension."
            assert np.all(
                np.isfinite(centroids)
            ), "qe_centroids must be finite."
        return values

    @root_validator(skip_on_failure=True)
    def clusters_non_empty(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        """
        Ensures that every assignment is valid and every cluster is used.

        Args:
            values: The field values.

        Returns:
            The same values.

        """
        num_clusters = values["num_clusters"]
        used = set(values["assignments"].values())
        assert used <= set(
            range(num_clusters)
        ), f"Assignments must be in [0, {num_clusters})."
        empty = sorted(set(range(num_clusters)) - used)
        assert not empty, f"Clusters {empty} have no utterances."
        return values

    @property
    def centroid_matrix(self) -> FloatArray:
        """
        The QE centroids as a matrix, one row per cluster.
        """
        return np.asarray(self.qe_centroids, dtype=np.float64)

    def members(self, cluster: int) -> List[str]:
        """
        Args:
            cluster: The cluster index.

        Returns:
            The sorted IDs of the utterances in the cluster.

        """
        return sorted(
            record_id
            for record_id, assigned in self.assignments.items()
            if assigned == cluster
        )
