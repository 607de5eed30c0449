"""
Clustering of training utterances by quality score or quality embedding.
"""


from pathlib import Path
from typing import Dict, Mapping, Sequence

import numpy as np
from loguru import logger

from ..corpus import UtteranceRecord
from ..dsp import StftConfig, load_waveform, lps, stft
from ..quality import QualityNet, QualityResult, predict_quality
from .kmeans import ClusterError, kmeans
from .schemas import ClusterSpec, KMeansConfig, Strategy


def cluster_by_qs(
    scores: Mapping[str, float],
    num_clusters: int,
    *,
    seed: int = 0,
    qnet_sha256: str | None = None,
) -> ClusterSpec:
    """
    Splits utterances into groups of similar score. Utterances are sorted by
    (score, ID) and cut into contiguous groups whose sizes differ by at most
    one, with the larger groups first.

    Args:
        scores: The score of every utterance, by ID.
        num_clusters: The number of groups.
        seed: Recorded in the cluster spec.
        qnet_sha256: Recorded in the cluster spec.

    Raises:
        `ClusterError` if there are fewer utterances than groups, a score is
        not finite, or two groups end up with the same mean score.

    Returns:
        The cluster spec, with the mean score of each group.

    """
    if num_clusters < 1:
        raise ClusterError("Need at least one cluster.")
    if len(scores) < num_clusters:
        raise ClusterError(
            f"Cannot form {num_clusters} clusters from {len(scores)} "
            f"utterances."
        )
    if not all(np.isfinite(s) for s in scores.values()):
        raise ClusterError("Scores must be finite.")

    ordered = sorted(
        scores, key=lambda record_id: (scores[record_id], record_id)
    )
    base_size, num_larger = divmod(len(ordered), num_clusters)
    assignments: Dict[str, int] = {}
    means = []
    start = 0
    for cluster in range(num_clusters):
        size = base_size + (1 if cluster < num_larger else 0)
        group = ordered[start : start + size]
        start += size
        assignments.update({record_id: cluster for record_id in group})
        means.append(float(np.mean([scores[r] for r in group])))

    if any(a >= b for a, b in zip(means, means[1:])):
        raise ClusterError(
            f"Cluster mean scores {means} are not distinct; use fewer "
            f"clusters."
        )
    logger.info(
        "Clustered {} utterances by score: means {}.", len(ordered), means
    )
    return ClusterSpec(
        strategy=Strategy.QS,
        num_clusters=num_clusters,
        qs_means=means,
        assignments=assignments,
        seed=seed,
        qnet_sha256=qnet_sha256,
    )


def cluster_by_qe(
    embeddings: Mapping[str, np.ndarray],
    num_clusters: int,
    *,
    seed: int = 0,
    kmeans_config: KMeansConfig | None = None,
    qnet_sha256: str | None = None,
) -> ClusterSpec:
    """
    Clusters utterance embeddings with k-means.

    Args:
        embeddings: The embedding of every utterance, by ID.
        num_clusters: The number of clusters.
        seed: Seed for k-means.
        kmeans_config: The k-means parameters.
        qnet_sha256: Recorded in the cluster spec.

    Raises:
        `ClusterError` if k-means fails.

    Returns:
        The cluster spec, with the centroid of each cluster.

    """
    record_ids = sorted(embeddings)
    points = np.stack([embeddings[r] for r in record_ids])
    result = kmeans(points, num_clusters, seed, kmeans_config)
    logger.info(
        "Clustered {} utterances by embedding: inertia {}.",
        len(record_ids),
        result.inertia,
    )
    return ClusterSpec(
        strategy=Strategy.QE,
        num_clusters=num_clusters,
        qe_centroids=result.centroids.tolist(),
        assignments={
            record_id: int(cluster)
            for record_id, cluster in zip(record_ids, result.assignments)
        },
        seed=seed,
        qnet_sha256=qnet_sha256,
    )


def assess_records(
    records: Sequence[UtteranceRecord],
    qnet: QualityNet,
    stft_config: StftConfig,
) -> Dict[str, QualityResult]:
    """
    Runs the quality predictor on the noisy signal of every record.

    Args:
        records: The records.
        qnet: The quality predictor.
        stft_config: The STFT configuration.

    Returns:
        The prediction for every record, by ID.

    """
    results = {}
    for record in records:
        noisy = load_waveform(record.noisy_path)
        results[record.id] = predict_quality(
            qnet, lps(stft(noisy, stft_config))
        )
    return results


def build_cluster_spec(
    records: Sequence[UtteranceRecord],
    qnet: QualityNet,
    strategy: Strategy,
    num_clusters: int,
    seed: int,
    *,
    stft_config: StftConfig,
    kmeans_config: KMeansConfig | None = None,
    qnet_sha256: str | None = None,
) -> ClusterSpec:
    """
    Clusters training records by predicted quality score (QS) or by
    utterance embedding (QE).

    Args:
        records: The training records.
        qnet: The trained quality predictor.
        strategy: The clustering strategy.
        num_clusters: The number of clusters.
        seed: Seed for k-means.
        stft_config: The STFT configuration.
        kmeans_config: The k-means parameters (QE only).
        qnet_sha256: Hash of the predictor checkpoint, recorded in the
            cluster spec.

    Raises:
        `ClusterError` if the records can't be clustered.

    Returns:
        The cluster spec.

    """
    logger.info(
        "Assessing {} training records for {} clustering.",
        len(records),
        strategy.value.upper(),
    )
    results = assess_records(records, qnet, stft_config)
    if strategy == Strategy.QS:
        return cluster_by_qs(
            {r: result.utterance_score for r, result in results.items()},
            num_clusters,
            seed=seed,
            qnet_sha256=qnet_sha256,
        )
    return cluster_by_qe(
        {r: result.utterance_embedding for r, result in results.items()},
        num_clusters,
        seed=seed,
        kmeans_config=kmeans_config,
        qnet_sha256=qnet_sha256,
    )


def save_cluster_spec(spec: ClusterSpec, path: Path) -> None:
    """
    Writes a cluster spec as JSON.

    Args:
        spec: The cluster spec.
        path: The file to write.

    """
    spec.write_json(path)


def load_cluster_spec(path: Path) -> ClusterSpec:
    """
    Reads a cluster spec.

    Args:
        path: The JSON file.

    Raises:
        `ClusterError` if the file is missing or not a valid spec.

    Returns:
        The cluster spec.

    """
    try:
        return ClusterSpec.read_json(path)
    except (OSError, ValueError) as error:
        raise ClusterError(
            f"Cannot read cluster spec {path}: {error}"
        ) from error
