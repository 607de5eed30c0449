"""
Helpers for building small enhancement models in tests.
"""


import numpy as np
import torch

from zmos.dsp import StftConfig
from zmos.enhancement import SE_KIND, ConvBlock, SeModel, SeModelSpec, se_graph
from zmos.nn import (
    FeatureSpec,
    ModelCheckpoint,
    ModelGraph,
    Normalization,
    NormStats,
    checkpoint_from_model,
)

STFT = StftConfig()

TINY_SPEC = SeModelSpec(
    blocks=[ConvBlock(channels=2, strides=[3])], dense_width=8, context=1
)
"""
Small enough to train in a few seconds.
"""


PASSTHROUGH_SPEC = SeModelSpec(
    blocks=[ConvBlock(channels=2, strides=[1])],
    kernel=(1, 1),
    dense_width=2 * STFT.n_bins,
    context=0,
)
"""
Per-bin convolutions and a hidden layer wide enough to pass every frame
through unchanged.
"""


def untrained_checkpoint(
    spec: SeModelSpec = TINY_SPEC, seed: int = 0
) -> ModelCheckpoint:
    """
    Creates an enhancement checkpoint with initial weights.

    Args:
        spec: The architecture.
        seed: The initialization seed.

    Returns:
        The checkpoint.

    """
    model = ModelGraph(se_graph(spec, STFT.n_bins), seed=seed)
    stats = NormStats(mean=[-5.0] * STFT.n_bins, std=[3.0] * STFT.n_bins)
    return checkpoint_from_model(
        model,
        kind=SE_KIND,
        normalization=Normalization(input=stats, target=stats),
        features=FeatureSpec(stft=STFT, context=spec.context),
    )


def untrained_model(spec: SeModelSpec = TINY_SPEC, seed: int = 0) -> SeModel:
    return SeModel(untrained_checkpoint(spec, seed))


def identity_checkpoint() -> ModelCheckpoint:
    """
    Creates a model that outputs its input frame. The convolution splits
    each bin into its positive and negative parts, and the output layer
    adds them back together.

    Returns:
        The checkpoint.

    """
    model = ModelGraph(se_graph(PASSTHROUGH_SPEC, STFT.n_bins))
    eye = np.eye(STFT.n_bins)
    weights = dict(
        conv0=np.array([1.0, -1.0]).reshape(2, 1, 1, 1),
        hidden=np.eye(2 * STFT.n_bins),
        output=np.concatenate([eye, -eye], axis=1),
    )
    params = model.named_tensors()
    with torch.no_grad():
        for layer, weight in weights.items():
            params[f"{layer}.weight"].copy_(torch.from_numpy(weight))
            params[f"{layer}.bias"].zero_()

    stats = NormStats(mean=[-5.0] * STFT.n_bins, std=[3.0] * STFT.n_bins)
    return checkpoint_from_model(
        model,
        kind=SE_KIND,
        normalization=Normalization(input=stats, target=stats),
        features=FeatureSpec(stft=STFT, context=0),
    )
