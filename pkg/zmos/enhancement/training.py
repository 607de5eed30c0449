"""
Training of the baseline and the component enhancement models.
"""


import functools
from typing import Dict, List, Sequence, Tuple

import numpy as np
import torch
from loguru import logger
from pydantic.dataclasses import dataclass

from ..corpus import UtteranceRecord
from ..dsp import StftConfig, load_waveform, lps, stft
from ..hashing import derive_seed
from ..nn import (
    AdamState,
    FeatureSpec,
    ModelCheckpoint,
    ModelGraph,
    NonFiniteError,
    Normalization,
    NormStats,
    TrainingMetadata,
    adam_step,
    backward,
    checkpoint_from_model,
    forward,
)
from ..parallel import JobRunner
from ..selection import ClusterSpec
from ..type_helpers import ArbitraryTypesConfig
from .features import stack_context
from .model import INFERENCE_BATCH, SE_KIND, EnhancementError, se_graph
from .schemas import SeModelSpec, SeTrainingConfig


@dataclass(frozen=True, config=ArbitraryTypesConfig)
class SePair:
    """
    LPS of one clean/noisy pair.

    Attributes:
        record_id: The ID of the record.
        noisy: Noisy LPS, one row per frame.
        clean: Clean LPS, one row per frame.

    """

    record_id: str
    noisy: np.ndarray
    clean: np.ndarray


def prepare_pair(
    record: UtteranceRecord, *, stft_config: StftConfig
) -> SePair:
    """
    Args:
        record: The record.
        stft_config: The STFT configuration.

    Returns:
        The LPS of the clean and noisy signals.

    """
    clean = load_waveform(record.clean_path)
    noisy = load_waveform(record.noisy_path)
    return SePair(
        record_id=record.id,
        noisy=lps(stft(noisy, stft_config)).values,
        clean=lps(stft(clean, stft_config)).values,
    )


def _training_arrays(
    pairs: Sequence[SePair], normalization: Normalization, context: int
) -> Tuple[torch.Tensor, torch.Tensor]:
    """
    Builds normalized, context-stacked inputs and normalized targets for
    every frame.

    Args:
        pairs: The training pairs.
        normalization: The normalization statistics.
        context: Neighbors to stack on each side of each frame.

    Returns:
        The inputs and the targets.

    """
    inputs = np.concatenate(
        [
            stack_context(normalization.input.normalize(p.noisy), context)
            for p in pairs
        ]
    )
    targets = np.concatenate(
        [normalization.target.normalize(p.clean) for p in pairs]
    )
    return torch.from_numpy(inputs), torch.from_numpy(targets)


@torch.no_grad()
def frame_mse(
    model: ModelGraph, inputs: torch.Tensor, targets: torch.Tensor
) -> float:
    """
    Args:
        model: The model.
        inputs: Model inputs.
        targets: Model targets.

    Returns:
        The mean squared error over all frames and bins.

    """
    total = 0.0
    for start in range(0, len(inputs), INFERENCE_BATCH):
        end = start + INFERENCE_BATCH
        outputs = model(inputs[start:end])
        total += float(((outputs - targets[start:end]) ** 2).sum())
    return total / targets.numel()


def _train_epoch(
    model: ModelGraph,
    inputs: torch.Tensor,
    targets: torch.Tensor,
    config: SeTrainingConfig,
    state: AdamState,
    rng: np.random.Generator,
) -> None:
    """
    Runs one pass of mini-batch Adam over shuffled frames.

    Args:
        model: The model to train.
        inputs: Model inputs.
        targets: Model targets.
        config: The training configuration.
        state: The optimizer state.
        rng: Used to shuffle the frames.

    """
    order = torch.from_numpy(rng.permutation(len(inputs)))
    params = model.named_tensors()
    for start in range(0, len(order), config.batch_size):
        batch = order[start : start + config.batch_size]
        with torch.enable_grad():
            outputs, tape = forward(model, inputs[batch])
            error = outputs - targets[batch]
            gradients = backward(tape, 2.0 * error.detach() / error.numel())
        adam_step(params, gradients, state, config.lr)


def train_se_model(
    records: Sequence[UtteranceRecord],
    spec: SeModelSpec,
    config: SeTrainingConfig,
    stft_config: StftConfig,
    *,
    seed: int | None = None,
    runner: JobRunner | None = None,
) -> ModelCheckpoint:
    """
    Trains a model to map noisy LPS to clean LPS, minimizing the mean
    squared error between normalized features.

    Args:
        records: The training records.
        spec: The architecture.
        config: The training configuration.
        stft_config: The STFT configuration.
        seed: Seed for initialization and shuffling. Defaults to the seed
            in `config`.
        runner: Used to compute features in parallel.

    Raises:
        `EnhancementError` if there are no records, or training diverges.

    Returns:
        The trained model.

    """
    if not records:
        raise EnhancementError("Cannot train on an empty set of records.")
    if seed is None:
        seed = config.seed
    if runner is None:
        runner = JobRunner(1)

    pairs = runner.map(
        functools.partial(prepare_pair, stft_config=stft_config), records
    )
    normalization = Normalization(
        input=NormStats.from_frames(
            np.concatenate([p.noisy for p in pairs]), config.std_floor
        ),
        target=NormStats.from_frames(
            np.concatenate([p.clean for p in pairs]), config.std_floor
        ),
    )
    inputs, targets = _training_arrays(pairs, normalization, spec.context)
    model = ModelGraph(se_graph(spec, stft_config.n_bins), seed=seed)
    logger.info(
        "Training enhancement model on {} frames from {} records.",
        len(inputs),
        len(pairs),
    )

    state = AdamState()
    rng = np.random.default_rng(derive_seed(seed, "shuffle"))
    losses: List[float] = []
    try:
        for epoch in range(config.epochs):
            _train_epoch(model, inputs, targets, config, state, rng)
            losses.append(frame_mse(model, inputs, targets))
            if not np.isfinite(losses[-1]):
                raise EnhancementError(f"Training diverged in epoch {epoch}.")
            logger.debug("Epoch {}: MSE {}.", epoch + 1, losses[-1])
    except NonFiniteError as error:
        raise EnhancementError(f"Training diverged: {error}") from error

    return checkpoint_from_model(
        model,
        kind=SE_KIND,
        normalization=normalization,
        training=TrainingMetadata(
            seed=seed,
            epochs=config.epochs,
            loss_curve=losses,
            record_ids=sorted(p.record_id for p in pairs),
        ),
        features=FeatureSpec(stft=stft_config, context=spec.context),
    )


def train_baseline(
    records: Sequence[UtteranceRecord],
    spec: SeModelSpec,
    config: SeTrainingConfig,
    stft_config: StftConfig,
    *,
    runner: JobRunner | None = None,
) -> ModelCheckpoint:
    """
    Trains a single model on every training record.

    Args:
        records: The training records.
        spec: The architecture.
        config: The training configuration.
        stft_config: The STFT configuration.
        runner: Used to compute features in parallel.

    Returns:
        The baseline model.

    """
    logger.info("Training the baseline on {} records.", len(records))
    return train_se_model(
        records,
        spec,
        config,
        stft_config,
        seed=derive_seed(config.seed, "baseline"),
        runner=runner,
    )


def _train_component(
    cluster: int,
    *,
    cluster_records: Dict[int, List[UtteranceRecord]],
    spec: SeModelSpec,
    config: SeTrainingConfig,
    stft_config: StftConfig,
) -> ModelCheckpoint:
    """
    Trains the model for one cluster.

    Args:
        cluster: The cluster index.
        cluster_records: The records of every cluster.
        spec: The architecture.
        config: The training configuration.
        stft_config: The STFT configuration.

    Returns:
        The component model.

    """
    logger.info(
        "Training component {} on {} records.",
        cluster,
        len(cluster_records[cluster]),
    )
    return train_se_model(
        cluster_records[cluster],
        spec,
        config,
        stft_config,
        seed=derive_seed(config.seed, "component", cluster),
    )


def train_component_bank(
    records: Sequence[UtteranceRecord],
    cluster_spec: ClusterSpec,
    spec: SeModelSpec,
    config: SeTrainingConfig,
    stft_config: StftConfig,
    *,
    runner: JobRunner | None = None,
) -> Dict[int, ModelCheckpoint]:
    """
    Trains one model per cluster, each only on the records of its cluster.

    Args:
        records: The training records.
        cluster_spec: Assigns every training record to a cluster.
        spec: The architecture.
        config: The training configuration.
        stft_config: The STFT configuration.
        runner: Used to train the components in parallel.

    Raises:
        `EnhancementError` if the cluster spec doesn't cover exactly the
        training records.

    Returns:
        The component models, by cluster index.

    """
    record_ids = {r.id for r in records}
    assigned = set(cluster_spec.assignments)
    if record_ids != assigned:
        raise EnhancementError(
            f"Cluster spec covers {len(assigned)} records, of which "
            f"{len(assigned & record_ids)} are among the "
            f"{len(record_ids)} training records."
        )
    if runner is None:
        runner = JobRunner(1)

    clusters = list(range(cluster_spec.num_clusters))
    cluster_records: Dict[int, List[UtteranceRecord]] = {
        t: [] for t in clusters
    }
    for record in records:
        cluster_records[cluster_spec.assignments[record.id]].append(record)

    checkpoints = runner.map(
        functools.partial(
            _train_component,
            cluster_records=cluster_records,
            spec=spec,
            config=config,
            stft_config=stft_config,
        ),
        clusters,
    )
    return dict(zip(clusters, checkpoints))
