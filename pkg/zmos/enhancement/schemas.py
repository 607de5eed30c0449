"""
Architecture and training configuration of the enhancement models, and the
records that describe a saved ensemble.
"""


import enum
from typing import List, Optional, Tuple

from pydantic import Field
from pydantic.types import confloat, conint

from ..schemas import ZmosModel
from ..selection import Strategy


@enum.unique
class SePreset(str, enum.Enum):
    """
    Named enhancement architectures.
    """

    DESK = "desk"
    """
    Four convolutional layers, one per channel count.
    """
    FULL = "full"
    """
    Twelve convolutional layers, three per channel count.
    """


_CHANNELS = (16, 32, 64, 128)


class ConvBlock(ZmosModel):
    """
    Convolutional layers that share a channel count.

    Attributes:
        channels: Output channels of every layer in the block.
        strides: Frequency-axis stride of each layer. There is one layer per
            entry.

    """

    channels: conint(gt=0)
    strides: List[conint(gt=0)] = Field(..., min_items=1)


class SeModelSpec(ZmosModel):
    """
    A CNN that maps noisy LPS frames, with context, to clean LPS frames.

    Attributes:
        blocks: The convolutional blocks, in order.
        kernel: Kernel size over (time, frequency) of every convolution.
        dense_width: Width of the fully-connected layer after the
            convolutions.
        context: Neighboring frames stacked on each side of the frame being
            enhanced.

    """

    blocks: List[ConvBlock] = Field(..., min_items=1)
    kernel: Tuple[conint(gt=0), conint(gt=0)] = (3, 3)
    dense_width: conint(gt=0) = 128
    context: conint(ge=0) = 2

    @classmethod
    def from_preset(cls, preset: SePreset) -> "SeModelSpec":
        """
        Args:
            preset: The named architecture.

        Returns:
            The architecture.

        """
        strides = [3] if preset == SePreset.DESK else [1, 1, 3]
        return cls(
            blocks=[
                ConvBlock(channels=channels, strides=strides)
                for channels in _CHANNELS
            ]
        )

    @property
    def num_conv_layers(self) -> int:
        return sum(len(block.strides) for block in self.blocks)


class SeTrainingConfig(ZmosModel):
    """
    Training parameters for enhancement models.

    Attributes:
        epochs: Passes over the training frames.
        lr: Adam learning rate.
        batch_size: Frames per update.
        seed: Base seed. Each model derives its own seed from it.
        std_floor: Lower bound on the per-bin standard deviation used for
            normalization.

    """

    epochs: conint(ge=0) = 20
    lr: confloat(gt=0.0) = 1e-3
    batch_size: conint(gt=0) = 128
    seed: int = 0
    std_floor: confloat(gt=0.0) = 1e-5


class FileEntry(ZmosModel):
    """
    A file in an ensemble directory.

    Attributes:
        path: Path relative to the ensemble directory.
        sha256: Hash of the file contents.

    """

    path: str
    sha256: str


class EnsembleManifest(ZmosModel):
    """
    Contents of `ensemble.json`.

    Attributes:
        strategy: The routing strategy.
        num_clusters: The number of component models.
        cluster_spec: The cluster spec.
        components: The component model checkpoints, by cluster index.
        baseline: The baseline checkpoint, if there is one.
        qnet: The quality predictor checkpoint used for routing, if it was
            recorded.

    """

    strategy: Strategy
    num_clusters: conint(ge=1)
    cluster_spec: FileEntry
    components: List[FileEntry]
    baseline: Optional[FileEntry] = None
    qnet: Optional[FileEntry] = None


class EnhanceDiagnostics(ZmosModel):
    """
    How an utterance was routed.

    Attributes:
        strategy: The routing strategy.
        chosen: The index of the component model that was used.
        score: The predicted utterance score.
        distances: Distance from the utterance to each cluster.
        embedding: The utterance embedding (QE only).

    """

    strategy: Strategy
    chosen: conint(ge=0)
    score: float
    distances: List[float]
    embedding: Optional[List[float]] = None
