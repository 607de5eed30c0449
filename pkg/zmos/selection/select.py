"""
Routing of test utterances to component models.
"""


import numpy as np

from ..errors import ZmosError
from ..type_helpers import FloatArray
from .schemas import ClusterSpec, Strategy


class SelectionError(ZmosError):
    """
    Raised when an utterance can't be routed with a cluster spec.
    """


def _require(spec: ClusterSpec, strategy: Strategy) -> None:
    if spec.strategy != strategy:
        raise SelectionError(
            f"Cannot select with {strategy.value.upper()} using a "
            f"{spec.strategy.value.upper()} cluster spec."
        )


def qs_distances(score: float, spec: ClusterSpec) -> FloatArray:
    """
    Args:
        score: The predicted utterance score.
        spec: A QS cluster spec.

    Raises:
        `SelectionError` if the cluster spec is not for QS.

    Returns:
        The absolute difference between the score and each cluster mean.

    """
    _require(spec, Strategy.QS)
    if not np.isfinite(score):
        raise SelectionError("Score must be finite.")
    return np.abs(score - np.asarray(spec.qs_means))


def qe_distances(embedding: np.ndarray, spec: ClusterSpec) -> FloatArray:
    """
    Args:
        embedding: The utterance embedding.
        spec: A QE cluster spec.

    Raises:
        `SelectionError` if the cluster spec is not for QE, or the embedding
        has the wrong dimension.

    Returns:
        The Euclidean distance from the embedding to each centroid.

    """
    _require(spec, Strategy.QE)
    centroids = spec.centroid_matrix
    embedding = np.asarray(embedding, dtype=np.float64)
    if embedding.shape != (centroids.shape[1],):
        raise SelectionError(
            f"Embedding of shape {list(embedding.shape)} does not match "
            f"centroids of dimension {centroids.shape[1]}."
        )
    return np.linalg.norm(centroids - embedding, axis=1)


def select_model_qs(score: float, spec: ClusterSpec) -> int:
    """
    Picks the cluster whose mean score is closest to the utterance score.
    Ties go to the lower index.

    Args:
        score: The predicted utterance score.
        spec: A QS cluster spec.

    Raises:
        `SelectionError` if the cluster spec is not for QS.

    Returns:
        The cluster index.

    """
    return int(np.argmin(qs_distances(score, spec)))


def select_model_qe(embedding: np.ndarray, spec: ClusterSpec) -> int:
    """
    Picks the cluster whose centroid is closest to the utterance
    embedding. Ties go to the lower index.

    Args:
        embedding: The utterance embedding.
        spec: A QE cluster spec.

    Raises:
        `SelectionError` if the cluster spec is not for QE, or the embedding
        has the wrong dimension.

    Returns:
        The cluster index.

    """
    return int(np.argmin(qe_distances(embedding, spec)))
