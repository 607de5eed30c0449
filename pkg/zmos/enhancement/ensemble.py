"""
Component ensembles and their on-disk layout.
"""


from pathlib import Path
from typing import Mapping

from loguru import logger

from ..hashing import sha256_file
from ..nn import ModelCheckpoint, save_checkpoint
from ..quality import QualityNet
from ..selection import (
    ClusterSpec,
    Strategy,
    load_cluster_spec,
    save_cluster_spec,
)
from .model import EnhancementError, SeModel
from .schemas import EnsembleManifest, FileEntry

ENSEMBLE_MANIFEST = "ensemble.json"
CLUSTER_SPEC_FILE = "cluster_spec.json"
BASELINE_FILE = "baseline.ckpt"


def component_file(cluster: int) -> str:
    return f"component_{cluster}.ckpt"


class ComponentEnsemble:
    """
    One enhancement model per cluster, plus the cluster spec that routes
    utterances to them.
    """

    def __init__(
        self,
        cluster_spec: ClusterSpec,
        models: Mapping[int, ModelCheckpoint],
        baseline: ModelCheckpoint | None = None,
    ):
        """
        Args:
            cluster_spec: The cluster spec.
            models: The component models, by cluster index.
            baseline: The model trained on all training data, if any.

        Raises:
            `EnhancementError` if the models aren't keyed exactly by the
            cluster indices, or don't share a feature configuration.

        """
        expected = set(range(cluster_spec.num_clusters))
        if set(models) != expected:
            raise EnhancementError(
                f"Ensemble needs models for clusters {sorted(expected)}, "
                f"got {sorted(models)}."
            )
        self.cluster_spec = cluster_spec
        self.models = {t: SeModel(models[t]) for t in sorted(models)}
        self.baseline = None if baseline is None else SeModel(baseline)

        stft_configs = [m.stft_config for m in self.models.values()]
        if any(c != stft_configs[0] for c in stft_configs):
            raise EnhancementError("Component models use different STFTs.")

    @property
    def strategy(self) -> Strategy:
        return self.cluster_spec.strategy

    def save(self, directory: Path, qnet_path: Path | None = None) -> Path:
        """
        Writes the ensemble as a directory of checkpoints, with a manifest
        of their hashes.

        Args:
            directory: The directory to write to.
            qnet_path: The quality predictor checkpoint to record in the
                manifest, if any.

        Returns:
            The path of the manifest.

        """
        directory.mkdir(parents=True, exist_ok=True)

        def entry(name: str) -> FileEntry:
            return FileEntry(path=name, sha256=sha256_file(directory / name))

        save_cluster_spec(self.cluster_spec, directory / CLUSTER_SPEC_FILE)
        for cluster, model in self.models.items():
            save_checkpoint(
                model.checkpoint, directory / component_file(cluster)
            )
        if self.baseline is not None:
            save_checkpoint(
                self.baseline.checkpoint, directory / BASELINE_FILE
            )

        manifest = EnsembleManifest(
            strategy=self.strategy,
            num_clusters=self.cluster_spec.num_clusters,
            cluster_spec=entry(CLUSTER_SPEC_FILE),
            components=[entry(component_file(t)) for t in self.models],
            baseline=entry(BASELINE_FILE) if self.baseline else None,
            qnet=(
                None
                if qnet_path is None
                else FileEntry(
                    path=str(qnet_path), sha256=sha256_file(qnet_path)
                )
            ),
        )
        manifest_path = directory / ENSEMBLE_MANIFEST
        manifest.write_json(manifest_path)
        logger.info("Saved ensemble to {}.", directory)
        return manifest_path

    @classmethod
    def load(cls, directory: Path) -> "ComponentEnsemble":
        """
        Loads an ensemble, checking every file against its recorded hash.

        Args:
            directory: The ensemble directory.

        Raises:
            `EnhancementError` if the manifest is missing or a file doesn't
            match it.

        Returns:
            The ensemble.

        """
        manifest_path = directory / ENSEMBLE_MANIFEST
        if not manifest_path.exists():
            raise EnhancementError(f"No {ENSEMBLE_MANIFEST} in {directory}.")
        manifest = EnsembleManifest.read_json(manifest_path)

        def checked(entry: FileEntry) -> Path:
            path = directory / entry.path
            if not path.exists():
                raise EnhancementError(f"Ensemble file {path} is missing.")
            if sha256_file(path) != entry.sha256:
                raise EnhancementError(
                    f"Ensemble file {path} does not match its recorded hash."
                )
            return path

        cluster_spec = load_cluster_spec(checked(manifest.cluster_spec))
        models = {
            t: SeModel.load(checked(entry)).checkpoint
            for t, entry in enumerate(manifest.components)
        }
        baseline = (
            None
            if manifest.baseline is None
            else SeModel.load(checked(manifest.baseline)).checkpoint
        )
        return cls(cluster_spec, models, baseline)


def resolve_ensemble_dir(path: Path, strategy: Strategy) -> Path:
    """
    Finds the ensemble directory for a strategy. The path may be an
    ensemble directory, or a directory with one ensemble per strategy.

    Args:
        path: The directory.
        strategy: The routing strategy.

    Raises:
        `EnhancementError` if no ensemble is found.

    Returns:
        The ensemble directory.

    """
    for candidate in (path, path / strategy.value):
        if (candidate / ENSEMBLE_MANIFEST).exists():
            return candidate
    raise EnhancementError(
        f"No {strategy.value.upper()} ensemble found in {path}."
    )


def load_routing_qnet(directory: Path) -> QualityNet:
    """
    Loads the quality predictor recorded in an ensemble manifest.

    Args:
        directory: The ensemble directory.

    Raises:
        `EnhancementError` if the manifest doesn't record a predictor, or
        the predictor doesn't match its recorded hash.

    Returns:
        The predictor.

    """
    manifest = EnsembleManifest.read_json(directory / ENSEMBLE_MANIFEST)
    if manifest.qnet is None:
        raise EnhancementError(
            f"Ensemble in {directory} does not record a quality predictor."
        )
    path = directory / manifest.qnet.path
    if not path.is_file() or sha256_file(path) != manifest.qnet.sha256:
        raise EnhancementError(
            f"Quality predictor {path} is missing or does not match the "
            f"ensemble."
        )
    return QualityNet.load(path)
