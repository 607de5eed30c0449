"""
The enhancement network, and enhancement of whole utterances with it.
"""


from pathlib import Path
from typing import List

import numpy as np
import torch

from ..dsp import (
    LpsMatrix,
    StftConfig,
    Waveform,
    lps,
    reconstruct_with_noisy_phase,
    stft,
)
from ..errors import ZmosError
from ..nn import (
    ActivationName,
    GraphSpec,
    LayerKind,
    LayerSpec,
    ModelCheckpoint,
    build_model,
    load_checkpoint,
)
from ..nn.schemas import FREE_DIM
from ..type_helpers import FloatArray
from .features import stack_context
from .schemas import SeModelSpec

SE_KIND = "se"
"""
Checkpoint kind of enhancement models.
"""
INFERENCE_BATCH = 512
"""
Frames per forward pass when enhancing an utterance.
"""


class EnhancementError(ZmosError):
    """
    Raised when an enhancement model can't be trained or used.
    """


def se_graph(spec: SeModelSpec, n_bins: int) -> GraphSpec:
    """
    Builds the enhancement graph: ReLU convolutions with frequency strides,
    a ReLU dense layer, and a linear output with one value per bin.

    Args:
        spec: The architecture.
        n_bins: Number of LPS bins per frame.

    Returns:
        The graph. Its input is (frames, 1, 2 * context + 1, n_bins).

    """
    layers: List[LayerSpec] = []
    for block in spec.blocks:
        for stride in block.strides:
            layers.append(
                LayerSpec(
                    name=f"conv{len(layers)}",
                    kind=LayerKind.CONV2D,
                    channels=block.channels,
                    kernel=spec.kernel,
                    stride=(1, stride),
                    activation=ActivationName.RELU,
                )
            )
    layers.extend(
        [
            LayerSpec(name="flatten", kind=LayerKind.FLATTEN),
            LayerSpec(
                name="hidden",
                kind=LayerKind.DENSE,
                units=spec.dense_width,
                activation=ActivationName.RELU,
            ),
            LayerSpec(name="output", kind=LayerKind.DENSE, units=n_bins),
        ]
    )
    return GraphSpec(
        input_shape=[FREE_DIM, 1, 2 * spec.context + 1, n_bins],
        layers=layers,
    )


class SeModel:
    """
    A trained enhancement model, ready for inference. Inference doesn't
    modify it, so one instance can be shared.
    """

    def __init__(self, checkpoint: ModelCheckpoint):
        """
        Args:
            checkpoint: The trained model.

        Raises:
            `EnhancementError` if the checkpoint is not an enhancement model.

        """
        if checkpoint.kind != SE_KIND:
            raise EnhancementError(
                f"Checkpoint of kind '{checkpoint.kind}' is not an "
                f"enhancement model."
            )
        if checkpoint.normalization.target is None:
            raise EnhancementError("Checkpoint has no target statistics.")
        self.checkpoint = checkpoint
        self.model = build_model(checkpoint)
        self.model.eval()

    @classmethod
    def load(cls, path: Path) -> "SeModel":
        """
        Loads a model from a checkpoint file.

        Args:
            path: The checkpoint file.

        Returns:
            The model.

        """
        return cls(load_checkpoint(path))

    @property
    def stft_config(self) -> StftConfig:
        return self.checkpoint.features.stft

    @property
    def context(self) -> int:
        return self.checkpoint.features.context

    @torch.no_grad()
    def predict_normalized(self, inputs: np.ndarray) -> FloatArray:
        """
        Runs the network in batches.

        Args:
            inputs: Normalized, context-stacked frames.

        Returns:
            The normalized prediction for every frame.

        """
        outputs = [
            self.model(
                torch.from_numpy(inputs[start : start + INFERENCE_BATCH])
            )
            for start in range(0, len(inputs), INFERENCE_BATCH)
        ]
        return torch.cat(outputs).numpy()

    def enhance_lps(self, noisy: LpsMatrix) -> LpsMatrix:
        """
        Maps noisy LPS frames to enhanced LPS frames.

        Args:
            noisy: The noisy LPS.

        Returns:
            The enhanced LPS, clamped to the log floor.

        """
        normalization = self.checkpoint.normalization
        inputs = stack_context(
            normalization.input.normalize(noisy.values), self.context
        )
        enhanced = normalization.target.denormalize(
            self.predict_normalized(inputs)
        )
        return LpsMatrix(
            values=np.maximum(enhanced, noisy.config.log_floor_lps),
            config=noisy.config,
        )


def enhance_with_model(noisy: Waveform, model: SeModel) -> Waveform:
    """
    Enhances an utterance with one model, reusing the noisy phase.

    Args:
        noisy: The noisy utterance.
        model: The enhancement model.

    Raises:
        `StftError` if the utterance is shorter than one window.

    Returns:
        The enhanced utterance, of the same length as the input.

    """
    spectrogram = stft(noisy, model.stft_config)
    enhanced = model.enhance_lps(lps(spectrogram))
    return reconstruct_with_noisy_phase(enhanced, spectrogram)
