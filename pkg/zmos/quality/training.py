"""
Training of the quality predictor.
"""


import functools
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd
import torch
from loguru import logger
from pydantic.dataclasses import dataclass

from ..corpus import UtteranceRecord
from ..dsp import StftConfig, load_waveform, lps, stft
from ..evaluation import MetricError, quality_target
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
    zero_gradients,
)
from ..parallel import JobRunner
from ..type_helpers import ArbitraryTypesConfig
from .loss import utterance_loss
from .model import (
    QUALITY_NET_KIND,
    QualityNetError,
    quality_net_graph,
    run_frames,
)
from .schemas import AlphaConfig, QualityNetConfig

LOG_COLUMNS = ("epoch", "train_loss", "val_loss")


@dataclass(frozen=True, config=ArbitraryTypesConfig)
class TrainingExample:
    """
    One utterance, prepared for training.

    Attributes:
        record_id: The ID of the record.
        lps: LPS of the noisy signal, one row per frame.
        target: The true quality of the noisy signal.

    """

    record_id: str
    lps: np.ndarray
    target: float


def prepare_example(
    record: UtteranceRecord, *, stft_config: StftConfig
) -> TrainingExample:
    """
    Computes the features and target for one record.

    Args:
        record: The record.
        stft_config: The STFT configuration.

    Raises:
        `QualityNetError` if the target can't be computed.

    Returns:
        The example.

    """
    clean = load_waveform(record.clean_path)
    noisy = load_waveform(record.noisy_path)
    try:
        target = quality_target(clean, noisy)
    except MetricError as error:
        raise QualityNetError(
            f"Cannot compute the target for {record.id}: {error}"
        ) from error
    return TrainingExample(
        record_id=record.id,
        lps=lps(stft(noisy, stft_config)).values,
        target=target,
    )


def split_validation(
    examples: Sequence[TrainingExample], fraction: float, seed: int
) -> Tuple[List[TrainingExample], List[TrainingExample]]:
    """
    Holds out a random subset of examples. At least one example is always
    kept for training.

    Args:
        examples: The examples.
        fraction: Fraction of examples to hold out.
        seed: Seed for choosing the subset.

    Returns:
        The training and validation examples, each in the original order.

    """
    num_val = min(int(round(fraction * len(examples))), len(examples) - 1)
    rng = np.random.default_rng(derive_seed(seed, "validation"))
    held_out = set(rng.permutation(len(examples))[:num_val].tolist())
    train = [e for i, e in enumerate(examples) if i not in held_out]
    val = [e for i, e in enumerate(examples) if i in held_out]
    return train, val


def _to_input(example: TrainingExample, stats: NormStats) -> torch.Tensor:
    return torch.from_numpy(stats.normalize(example.lps))[None]


def loss_and_gradients(
    model: ModelGraph,
    features: torch.Tensor,
    target: float,
    alpha: AlphaConfig,
    scale: float = 1.0,
) -> Tuple[float, Dict[str, torch.Tensor]]:
    """
    Computes the objective for one utterance, and its gradient.

    Args:
        model: The predictor graph.
        features: Normalized LPS of shape (1, frames, bins).
        target: The true utterance quality.
        alpha: Weight of the frame-level term.
        scale: The gradient is of `scale` times the loss.

    Returns:
        The (unscaled) loss, and the gradients by parameter name.

    """
    with torch.enable_grad():
        output, tape = forward(model, features)
        loss = utterance_loss(target, output[0, :, 0], alpha)
        (upstream,) = torch.autograd.grad(
            loss * scale, tape.output, retain_graph=True
        )
        gradients = backward(tape, upstream)
    return float(loss), gradients


@torch.no_grad()
def mean_loss(
    model: ModelGraph,
    examples: Sequence[TrainingExample],
    stats: NormStats,
    alpha: AlphaConfig,
) -> float:
    """
    Args:
        model: The predictor graph.
        examples: The examples to evaluate on.
        stats: Input normalization statistics.
        alpha: Weight of the frame-level term.

    Returns:
        The objective averaged over the examples.

    """
    losses = [
        float(
            utterance_loss(
                e.target, run_frames(model, _to_input(e, stats))[0], alpha
            )
        )
        for e in examples
    ]
    return float(np.mean(losses))


def _train_epoch(
    model: ModelGraph,
    examples: List[TrainingExample],
    stats: NormStats,
    config: QualityNetConfig,
    state: AdamState,
    rng: np.random.Generator,
) -> None:
    """
    Runs one pass of mini-batch Adam over the training set. Gradients are
    accumulated over each batch in a fixed order.

    Args:
        model: The model to train.
        examples: The training examples.
        stats: Input normalization statistics.
        config: The training configuration.
        state: The optimizer state.
        rng: Used to shuffle the examples.

    """
    order = rng.permutation(len(examples))
    params = model.named_tensors()
    for start in range(0, len(order), config.batch_size):
        batch = [examples[i] for i in order[start : start + config.batch_size]]
        total = zero_gradients(params)
        for example in batch:
            _, gradients = loss_and_gradients(
                model,
                _to_input(example, stats),
                example.target,
                config.alpha,
                scale=1.0 / len(batch),
            )
            for name in total:
                total[name] += gradients[name]
        adam_step(params, total, state, config.lr)


def write_training_log(
    path: Path, train_losses: List[float], val_losses: List[float]
) -> None:
    """
    Writes the per-epoch losses as CSV.

    Args:
        path: The file to write.
        train_losses: Training loss after each epoch.
        val_losses: Validation loss after each epoch. May be empty.

    """
    epochs = len(train_losses)
    log = pd.DataFrame(
        {
            "epoch": np.arange(1, epochs + 1),
            "train_loss": train_losses,
            "val_loss": val_losses if val_losses else [np.nan] * epochs,
        },
        columns=list(LOG_COLUMNS),
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    log.to_csv(path, index=False, lineterminator="\n")


def train_quality_net(
    records: Sequence[UtteranceRecord],
    config: QualityNetConfig,
    stft_config: StftConfig,
    *,
    log_path: Path | None = None,
    runner: JobRunner | None = None,
) -> ModelCheckpoint:
    """
    Trains the quality predictor to match the quality target of each noisy
    training utterance.

    Args:
        records: The training records.
        config: The predictor configuration.
        stft_config: The STFT configuration for the LPS features.
        log_path: If given, the per-epoch losses are written here as CSV.
        runner: Used to prepare the examples in parallel.

    Raises:
        `QualityNetError` if there are no records, a target can't be
        computed, or training diverges.

    Returns:
        The trained predictor.

    """
    if not records:
        raise QualityNetError("Cannot train on an empty set of records.")
    if runner is None:
        runner = JobRunner(1)

    logger.info("Computing quality targets for {} records.", len(records))
    examples = runner.map(
        functools.partial(prepare_example, stft_config=stft_config), records
    )
    train, val = split_validation(examples, config.val_fraction, config.seed)
    stats = NormStats.from_frames(
        np.concatenate([e.lps for e in train]), config.std_floor
    )
    model = ModelGraph(
        quality_net_graph(config, stft_config.n_bins), seed=config.seed
    )
    logger.info(
        "Training quality predictor on {} utterances ({} held out).",
        len(train),
        len(val),
    )

    state = AdamState()
    shuffle_rng = np.random.default_rng(derive_seed(config.seed, "shuffle"))
    train_losses: List[float] = []
    val_losses: List[float] = []
    try:
        initial_loss = mean_loss(model, train, stats, config.alpha)
        for epoch in range(config.epochs):
            _train_epoch(model, train, stats, config, state, shuffle_rng)
            train_losses.append(mean_loss(model, train, stats, config.alpha))
            if val:
                val_losses.append(mean_loss(model, val, stats, config.alpha))
            if not np.isfinite(train_losses[-1]):
                raise QualityNetError(f"Training diverged in epoch {epoch}.")
            logger.debug(
                "Epoch {}: train loss {}, validation loss {}.",
                epoch + 1,
                train_losses[-1],
                val_losses[-1] if val_losses else None,
            )
    except NonFiniteError as error:
        raise QualityNetError(f"Training diverged: {error}") from error

    if train_losses and train_losses[-1] >= initial_loss:
        logger.warning(
            "Final training loss {} did not improve on initial loss {}.",
            train_losses[-1],
            initial_loss,
        )
    if log_path is not None:
        write_training_log(log_path, train_losses, val_losses)

    return checkpoint_from_model(
        model,
        kind=QUALITY_NET_KIND,
        normalization=Normalization(input=stats),
        training=TrainingMetadata(
            seed=config.seed,
            epochs=config.epochs,
            loss_curve=train_losses,
            val_loss_curve=val_losses,
            record_ids=[e.record_id for e in train],
        ),
        features=FeatureSpec(stft=stft_config),
    )
