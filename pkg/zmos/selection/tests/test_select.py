"""
Tests for the `select` module.
"""


import numpy as np
import pytest
from faker import Faker
from scipy.stats import special_ortho_group

from zmos.selection import (
    ClusterSpec,
    SelectionError,
    Strategy,
    select_model_qe,
    select_model_qs,
)


def _qs_spec(means: list[float]) -> ClusterSpec:
    """
    Args:
        means: The cluster means.

    Returns:
        A QS spec with one utterance per cluster.

    """
    return ClusterSpec(
        strategy=Strategy.QS,
        num_clusters=len(means),
        qs_means=means,
        assignments={f"u{t}": t for t in range(len(means))},
    )


def _qe_spec(centroids: np.ndarray) -> ClusterSpec:
    """
    Args:
        centroids: The centroids.

    Returns:
        A QE spec with one utterance per cluster.

    """
    return ClusterSpec(
        strategy=Strategy.QE,
        num_clusters=len(centroids),
        qe_centroids=centroids.tolist(),
        assignments={f"u{t}": t for t in range(len(centroids))},
    )


@pytest.mark.parametrize(
    ("score", "expected"),
    [(1.6, 0), (2.5, 0), (2.6, 1), (-100.0, 0), (100.0, 1)],
    ids=["nearest", "midway", "above_mid", "below_all", "above_all"],
)
def test_select_model_qs(score: float, expected: int) -> None:
    """
    Tests routing by score, including the lower-index tie rule.

    Args:
        score: The utterance score.
        expected: The expected cluster.

    """
    # Act and assert.
    assert select_model_qs(score, _qs_spec([1.5, 3.5])) == expected


def test_select_model_qs_affine_invariant(faker: Faker) -> None:
    """
    Tests that rescaling and shifting the scores and means together doesn't
    change the routing.

    Args:
        faker: The fixture to use for generating fake data.

    """
    # Arrange.
    means = [
        0.25 * i + faker.pyfloat(min_value=0, max_value=0.1) for i in range(4)
    ]
    midpoints = [(low + high) / 2 for low, high in zip(means, means[1:])]
    scale = faker.pyfloat(min_value=0.5, max_value=5)
    shift = faker.pyfloat(min_value=-1, max_value=1)
    transformed = _qs_spec([scale * m + shift for m in means])

    # Act and assert.
    for _ in range(50):
        score = faker.pyfloat(min_value=-0.5, max_value=1.5)
        if min(abs(score - m) for m in midpoints) < 1e-6:
            # Ties can round differently once transformed.
            continue
        assert select_model_qs(score, _qs_spec(means)) == select_model_qs(
            scale * score + shift, transformed
        )


def test_select_model_qe(faker: Faker) -> None:
    """
    Tests routing by embedding, including the lower-index tie rule.

    Args:
        faker: The fixture to use for generating fake data.

    """
    # Arrange.
    centroids = faker.numpy_rng().normal(size=(4, 3))
    symmetric = np.array([[1.0, 0.0], [-1.0, 0.0]])

    # Act and assert.
    assert select_model_qe(centroids[2], _qe_spec(centroids)) == 2
    assert select_model_qe(np.array([0.0, 5.0]), _qe_spec(symmetric)) == 0


def test_select_model_qe_rotation_invariant(faker: Faker) -> None:
    """
    Tests that rotating the embedding and centroids together doesn't change
    the routing.

    Args:
        faker: The fixture to use for generating fake data.

    """
    # Arrange.
    rng = faker.numpy_rng()
    centroids = rng.normal(size=(4, 6))

    # Act and assert.
    for _ in range(20):
        rotation = special_ortho_group.rvs(6, random_state=rng)
        embedding = rng.normal(size=6)
        assert select_model_qe(
            embedding, _qe_spec(centroids)
        ) == select_model_qe(
            rotation @ embedding, _qe_spec(centroids @ rotation.T)
        )


def test_wrong_strategy() -> None:
    """
    Tests that each selector only accepts its own kind of spec.
    """
    # Act and assert.
    with pytest.raises(SelectionError, match="QS"):
        select_model_qs(0.5, _qe_spec(np.eye(2)))
    with pytest.raises(SelectionError, match="QE"):
        select_model_qe(np.zeros(2), _qs_spec([0.1, 0.2]))


def test_dimension_mismatch() -> None:
    """
    Tests that embeddings must match the centroid dimension.
    """
    # Act and assert.
    with pytest.raises(SelectionError, match="dimension"):
        select_model_qe(np.zeros(3), _qe_spec(np.eye(2)))
