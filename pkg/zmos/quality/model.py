"""
The quality predictor network and inference with it.
"""


from pathlib import Path
from typing import List

import numpy as np
import torch

from ..dsp import LpsMatrix
from ..errors import ZmosError
from ..nn import (
    ActivationName,
    GraphSpec,
    LayerKind,
    LayerSpec,
    ModelCheckpoint,
    ModelGraph,
    ShapeError,
    build_model,
    forward,
    load_checkpoint,
)
from ..nn.schemas import FREE_DIM
from .schemas import QualityNetConfig, QualityResult

QUALITY_NET_KIND = "quality_net"
"""
Checkpoint kind of quality predictors.
"""
EMBEDDING_LAYER = "embedding"
"""
Layer whose output is the per-frame quality embedding.
"""
FRAME_SCORE_LAYER = "frame_score"


class QualityNetError(ZmosError):
    """
    Raised when the quality predictor can't be trained or used.
    """


def quality_net_graph(config: QualityNetConfig, n_bins: int) -> GraphSpec:
    """
    Builds the predictor graph: BLSTM layers over the LPS frames, a tanh
    embedding layer per frame, and a linear per-frame score head.

    Args:
        config: The predictor configuration.
        n_bins: Number of LPS bins per frame.

    Returns:
        The graph. Its input is (1, frames, n_bins).

    """
    layers: List[LayerSpec] = [
        LayerSpec(
            name="blstm" if i == 0 else f"blstm_{i}",
            kind=LayerKind.BLSTM,
            hidden=config.blstm_hidden,
        )
        for i in range(config.blstm_layers)
    ]
    layers.append(
        LayerSpec(
            name=EMBEDDING_LAYER,
            kind=LayerKind.DENSE,
            units=config.embed_dim,
            activation=ActivationName.TANH,
        )
    )
    layers.append(
        LayerSpec(name=FRAME_SCORE_LAYER, kind=LayerKind.DENSE, units=1)
    )
    return GraphSpec(input_shape=[1, FREE_DIM, n_bins], layers=layers)


class QualityNet:
    """
    A trained quality predictor, ready for inference. Inference doesn't
    modify it, so one instance can be shared.
    """

    def __init__(self, checkpoint: ModelCheckpoint):
        """
        Args:
            checkpoint: The trained predictor.

        Raises:
            `QualityNetError` if the checkpoint is not a quality predictor.

        """
        if checkpoint.kind != QUALITY_NET_KIND:
            raise QualityNetError(
                f"Checkpoint of kind '{checkpoint.kind}' is not a quality "
                f"predictor."
            )
        self.checkpoint = checkpoint
        self.model = build_model(checkpoint)
        self.model.eval()

    @classmethod
    def load(cls, path: Path) -> "QualityNet":
        """
        Loads a predictor from a checkpoint file.

        Args:
            path: The checkpoint file.

        Returns:
            The predictor.

        """
        return cls(load_checkpoint(path))

    @property
    def embed_dim(self) -> int:
        """
        Width of the quality embedding.
        """
        return int(self.model.layers[EMBEDDING_LAYER].weight.shape[0])


def run_frames(
    model: ModelGraph, features: torch.Tensor
) -> tuple[torch.Tensor, torch.Tensor]:
    """
    Runs the predictor graph on normalized features.

    Args:
        model: The predictor graph.
        features: Normalized LPS of shape (1, frames, bins).

    Returns:
        The frame scores, of shape (frames,), and the frame embeddings, of
        shape (frames, embed_dim).

    """
    output, tape = forward(model, features)
    return output[0, :, 0], tape.activations[EMBEDDING_LAYER][0]


def _features(qnet: QualityNet, lps: LpsMatrix) -> torch.Tensor:
    """
    Normalizes LPS frames with the statistics stored with the predictor.

    Args:
        qnet: The predictor.
        lps: The LPS of the utterance.

    Raises:
        `ShapeError` if the LPS has no frames or the wrong number of bins.

    Returns:
        The model input.

    """
    stats = qnet.checkpoint.normalization.input
    if lps.num_frames < 1:
        raise ShapeError("Cannot score an utterance with no frames.")
    if lps.values.shape[1] != len(stats.mean):
        raise ShapeError(
            f"LPS has {lps.values.shape[1]} bins, but the predictor expects "
            f"{len(stats.mean)}."
        )
    return torch.from_numpy(stats.normalize(lps.values))[None]


@torch.no_grad()
def predict_quality(qnet: QualityNet, lps: LpsMatrix) -> QualityResult:
    """
    Predicts the quality of an utterance.

    Args:
        qnet: The predictor.
        lps: The LPS of the utterance.

    Raises:
        `ShapeError` if the LPS doesn't match the predictor.

    Returns:
        The frame scores and embeddings, pooled over the utterance.

    """
    frame_scores, frame_embeddings = run_frames(
        qnet.model, _features(qnet, lps)
    )
    return QualityResult.from_frames(
        frame_scores.numpy(), frame_embeddings.numpy()
    )


def extract_embedding(qnet: QualityNet, lps: LpsMatrix) -> np.ndarray:
    """
    Computes the utterance-level quality embedding.

    Args:
        qnet: The predictor.
        lps: The LPS of the utterance.

    Raises:
        `ShapeError` if the LPS doesn't match the predictor.

    Returns:
        The temporal mean of the frame embeddings.

    """
    return predict_quality(qnet, lps).utterance_embedding
