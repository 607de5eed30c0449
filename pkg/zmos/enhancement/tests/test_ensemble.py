"""
Tests for the `ensemble` module.
"""


from pathlib import Path

import numpy as np
import pytest
from faker import Faker

from zmos.enhancement import (
    ComponentEnsemble,
    EnhancementError,
    EnsembleManifest,
    enhance_with_model,
    resolve_ensemble_dir,
)
from zmos.enhancement.ensemble import ENSEMBLE_MANIFEST
from zmos.selection import ClusterSpec, Strategy

from .models import untrained_checkpoint


def _cluster_spec(num_clusters: int) -> ClusterSpec:
    """
    Args:
        num_clusters: The number of clusters.

    Returns:
        A QS spec with one utterance per cluster.

    """
    return ClusterSpec(
        strategy=Strategy.QS,
        num_clusters=num_clusters,
        qs_means=[0.1 * (t + 1) for t in range(num_clusters)],
        assignments={f"u{t}": t for t in range(num_clusters)},
    )


def test_ensemble_keys_must_match_clusters() -> None:
    """
    Tests that every cluster needs exactly one model.
    """
    # Arrange.
    models = {0: untrained_checkpoint(), 2: untrained_checkpoint()}

    # Act and assert.
    with pytest.raises(EnhancementError, match="needs models"):
        ComponentEnsemble(_cluster_spec(2), models)


@pytest.mark.parametrize("with_baseline", [True, False])
def test_ensemble_save_load(
    tmp_path: Path, faker: Faker, with_baseline: bool
) -> None:
    """
    Tests that a saved ensemble loads with the same models.

    Args:
        tmp_path: The directory to use for temporary files.
        faker: The fixture to use for generating fake data.
        with_baseline: Whether to include a baseline.

    """
    # Arrange.
    models = {t: untrained_checkpoint(seed=t) for t in range(3)}
    baseline = untrained_checkpoint(seed=10) if with_baseline else None
    ensemble = ComponentEnsemble(_cluster_spec(3), models, baseline)
    qnet_path = tmp_path / "qnet.ckpt"
    qnet_path.write_bytes(b"predictor")
    noisy = faker.noise_waveform(num_samples=2000)

    # Act.
    manifest_path = ensemble.save(tmp_path / "qs", qnet_path=qnet_path)
    loaded = ComponentEnsemble.load(tmp_path / "qs")

    # Assert.
    manifest = EnsembleManifest.read_json(manifest_path)
    assert manifest.strategy == Strategy.QS
    assert [c.path for c in manifest.components] == [
        "component_0.ckpt",
        "component_1.ckpt",
        "component_2.ckpt",
    ]
    assert manifest.qnet.path == str(qnet_path)
    assert (manifest.baseline is not None) == with_baseline
    assert (loaded.baseline is not None) == with_baseline
    assert loaded.cluster_spec == ensemble.cluster_spec
    for cluster, model in loaded.models.items():
        np.testing.assert_array_equal(
            enhance_with_model(noisy, model).samples,
            enhance_with_model(noisy, ensemble.models[cluster]).samples,
        )


def test_ensemble_load_tampered(tmp_path: Path) -> None:
    """
    Tests that a modified checkpoint is detected.

    Args:
        tmp_path: The directory to use for temporary files.

    """
    # Arrange.
    models = {t: untrained_checkpoint(seed=t) for t in range(2)}
    ComponentEnsemble(_cluster_spec(2), models).save(tmp_path)
    component = tmp_path / "component_1.ckpt"
    component.write_bytes(component.read_bytes() + b"\0")

    # Act and assert.
    with pytest.raises(EnhancementError, match="recorded hash"):
        ComponentEnsemble.load(tmp_path)


def test_ensemble_load_missing(tmp_path: Path) -> None:
    """
    Tests loading from a directory without an ensemble.

    Args:
        tmp_path: The directory to use for temporary files.

    """
    # Act and assert.
    with pytest.raises(EnhancementError, match=ENSEMBLE_MANIFEST):
        ComponentEnsemble.load(tmp_path)


def test_resolve_ensemble_dir(tmp_path: Path) -> None:
    """
    Tests finding an ensemble directly or in a per-strategy subdirectory.

    Args:
        tmp_path: The directory to use for temporary files.

    """
    # Arrange.
    (tmp_path / "qe").mkdir()
    (tmp_path / "qe" / ENSEMBLE_MANIFEST).write_text("{}")

    # Act and assert.
    assert resolve_ensemble_dir(tmp_path, Strategy.QE) == tmp_path / "qe"
    assert (
        resolve_ensemble_dir(tmp_path / "qe", Strategy.QE) == tmp_path / "qe"
    )
    with pytest.raises(EnhancementError, match="No QS ensemble"):
        resolve_ensemble_dir(tmp_path, Strategy.QS)
