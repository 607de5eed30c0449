"""
Seeded k-means with k-means++ initialization.
"""


from typing import Dict, List, Tuple

import numpy as np
from loguru import logger
from pydantic.dataclasses import dataclass
from scipy.spatial.distance import cdist

from ..errors import ZmosError
from ..type_helpers import ArbitraryTypesConfig, FloatArray
from .schemas import KMeansConfig


class ClusterError(ZmosError):
    """
    Raised when utterances can't be clustered as requested.
    """


@dataclass(frozen=True, config=ArbitraryTypesConfig)
class KMeansResult:
    """
    Outcome of a k-means run.

    Attributes:
        centroids: The centroids, one row per cluster.
        assignments: The cluster index of each point.
        inertia: Sum of squared distances from each point to its centroid.
        inertia_history: The inertia after every assignment step. It never
            increases.
        iterations: Number of centroid updates that were run.

    """

    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    inertia_history: List[float]
    iterations: int


def kmeans_plusplus(
    points: np.ndarray, num_clusters: int, rng: np.random.Generator
) -> FloatArray:
    """
    Picks initial centroids, each with probability proportional to its
    squared distance from the nearest centroid picked so far. When every
    remaining point coincides with a centroid, the pick is uniform.

    Args:
        points: The points, one per row.
        num_clusters: The number of centroids to pick.
        rng: The random generator.

    Returns:
        The initial centroids.

    """
    chosen = [int(rng.integers(len(points)))]
    nearest = cdist(points, points[chosen], "sqeuclidean").min(axis=1)
    for _ in range(1, num_clusters):
        total = nearest.sum()
        if total > 0.0:
            index = int(rng.choice(len(points), p=nearest / total))
        else:
            index = int(rng.integers(len(points)))
        chosen.append(index)
        nearest = np.minimum(
            nearest,
            cdist(points, points[index : index + 1], "sqeuclidean")[:, 0],
        )
    return points[chosen].copy()


def _assign(
    points: np.ndarray, centroids: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Assigns every point to its nearest centroid. Ties go to the lower
    index. An empty cluster is repaired by moving its centroid onto the
    point that is farthest from its own centroid, among clusters with more
    than one point, and then assigning every point again.

    Args:
        points: The points.
        centroids: The centroids. Updated in-place by repairs.

    Returns:
        The assignments, and the squared distance of each point to its
        assigned centroid.

    """
    # Seized points stay with the cluster that seized them.
    seized: Dict[int, int] = {}
    while True:
        distances = cdist(points, centroids, "sqeuclidean")
        assignments = np.argmin(distances, axis=1)
        for cluster, point in seized.items():
            assignments[point] = cluster
        own = distances[np.arange(len(points)), assignments]

        sizes = np.bincount(assignments, minlength=len(centroids))
        empty = np.flatnonzero(sizes == 0)
        if len(empty) == 0:
            return assignments, own

        cluster = int(empty[0])
        candidates = np.flatnonzero(sizes[assignments] > 1)
        candidates = np.setdiff1d(candidates, list(seized.values()))
        point = int(candidates[np.argmax(own[candidates])])
        logger.debug("Cluster {} is empty, seizing point {}.", cluster, point)
        seized[cluster] = point
        centroids[cluster] = points[point]


def _lloyd(
    points: np.ndarray,
    centroids: np.ndarray,
    config: KMeansConfig,
) -> KMeansResult:
    """
    Runs Lloyd iterations from a set of initial centroids.

    Args:
        points: The points.
        centroids: The initial centroids.
        config: The k-means parameters.

    Returns:
        The result of the run.

    """
    centroids = centroids.copy()
    assignments, own = _assign(points, centroids)
    history = [float(own.sum())]

    iterations = 0
    for iterations in range(1, config.max_iter + 1):
        updated = np.stack(
            [
                points[assignments == cluster].mean(axis=0)
                for cluster in range(len(centroids))
            ]
        )
        movement = np.linalg.norm(updated - centroids, axis=1).max()
        centroids = updated
        assignments, own = _assign(points, centroids)
        history.append(float(own.sum()))
        if movement < config.tol:
            break

    return KMeansResult(
        centroids=centroids,
        assignments=assignments,
        inertia=history[-1],
        inertia_history=history,
        iterations=iterations,
    )


def kmeans(
    points: np.ndarray,
    num_clusters: int,
    seed: int,
    config: KMeansConfig | None = None,
) -> KMeansResult:
    """
    Clusters points by k-means.

    Args:
        points: The points, one per row.
        num_clusters: The number of clusters.
        seed: Seed for the initialization.
        config: The k-means parameters.

    Raises:
        `ClusterError` if there are fewer points than clusters, or any point
        is not finite.

    Returns:
        The best of `config.n_init` runs. Ties go to the earliest run.

    """
    if config is None:
        config = KMeansConfig()
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ClusterError("Points must be a matrix with one point per row.")
    if num_clusters < 1:
        raise ClusterError("Need at least one cluster.")
    if len(points) < num_clusters:
        raise ClusterError(
            f"Cannot form {num_clusters} clusters from {len(points)} points."
        )
    if not np.all(np.isfinite(points)):
        raise ClusterError("Points must be finite.")

    rng = np.random.default_rng(seed)
    best = None
    for run in range(config.n_init):
        result = _lloyd(
            points, kmeans_plusplus(points, num_clusters, rng), config
        )
        logger.debug(
            "k-means run {}: inertia {} after {} iterations.",
            run,
            result.inertia,
            result.iterations,
        )
        if best is None or result.inertia < best.inertia:
            best = result
    return best
