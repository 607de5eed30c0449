"""
Descriptions of network graphs, and the metadata stored with trained
models.
"""


import enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from pydantic import Field, root_validator, validator
from pydantic.dataclasses import dataclass
from pydantic.types import conint, constr

from ..dsp import StftConfig
from ..schemas import ZmosModel
from ..type_helpers import ArbitraryTypesConfig, FloatArray

FREE_DIM = -1
"""
Marks a dimension of a shape contract that can take any size, such as the
batch or time axis.
"""


@enum.unique
class LayerKind(str, enum.Enum):
    """
    Kinds of layers that a graph can contain.
    """

    DENSE = "dense"
    """
    Affine map over the last axis, followed by an activation.
    """
    CONV2D = "conv2d"
    """
    2-D cross-correlation over (time, frequency), followed by an
    activation. Input is (batch, channels, time, frequency).
    """
    BLSTM = "blstm"
    """
    Bidirectional LSTM over the time axis of (batch, time, features).
    """
    ACTIVATION = "activation"
    """
    Element-wise nonlinearity.
    """
    FLATTEN = "flatten"
    """
    Collapses everything but the batch axis.
    """


@enum.unique
class ActivationName(str, enum.Enum):
    """
    Supported element-wise nonlinearities.
    """

    RELU = "relu"
    TANH = "tanh"
    SIGMOID = "sigmoid"
    IDENTITY = "identity"


_REQUIRED_PARAMS = {
    LayerKind.DENSE: ("units",),
    LayerKind.CONV2D: ("channels",),
    LayerKind.BLSTM: ("hidden",),
    LayerKind.ACTIVATION: (),
    LayerKind.FLATTEN: (),
}
"""
Parameters that must be set for each kind of layer.
"""


class LayerSpec(ZmosModel):
    """
    One layer of a graph.

    Attributes:
        name: Unique name of the layer. Parameters are named
            `<name>.<parameter>`.
        kind: The kind of layer.
        units: Output width (dense).
        channels: Output channels (conv2d).
        kernel: Kernel size over (time, frequency) (conv2d). Must be odd so
            that "same" padding is symmetric.
        stride: Stride over (time, frequency) (conv2d).
        hidden: Hidden size per direction (blstm).
        activation: Nonlinearity applied after dense and conv2d layers, or
            by activation layers.

    """

    name: constr(regex=r"^[A-Za-z0-9_]+$")
    kind: LayerKind
    units: Optional[conint(gt=0)] = None
    channels: Optional[conint(gt=0)] = None
    kernel: Tuple[conint(gt=0), conint(gt=0)] = (3, 3)
    stride: Tuple[conint(gt=0), conint(gt=0)] = (1, 1)
    hidden: Optional[conint(gt=0)] = None
    activation: ActivationName = ActivationName.IDENTITY

    @validator("kernel")
    def kernel_odd(cls, kernel: Tuple[int, int]) -> Tuple[int, int]:
        """
        Ensures that the kernel has odd sizes.

        Args:
            kernel: The kernel size.

        Returns:
            The same size.

        """
        assert all(k % 2 == 1 for k in kernel), "Kernel sizes must be odd."
        return kernel

    @root_validator(skip_on_failure=True)
    def params_present(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        """
        Ensures that every parameter the layer kind needs is set.

        Args:
            values: The field values.

        Returns:
            The same values.

        """
        for param in _REQUIRED_PARAMS[values["kind"]]:
            assert (
                values.get(param) is not None
            ), f"{values['kind'].value} layer requires '{param}'."
        return values


class GraphSpec(ZmosModel):
    """
    A linear stack of layers.

    Attributes:
        input_shape: Shape contract for the input. `FREE_DIM` entries can
            take any size.
        layers: The layers, in order.

    """

    input_shape: List[int] = Field(..., min_items=1)
    layers: List[LayerSpec] = Field(..., min_items=1)

    @validator("input_shape")
    def dims_valid(cls, input_shape: List[int]) -> List[int]:
        """
        Ensures that every dimension is positive or free.

        Args:
            input_shape: The input shape.

        Returns:
            The same shape.

        """
        assert all(
            d > 0 or d == FREE_DIM for d in input_shape
        ), "Dimensions must be positive or free (-1)."
        return input_shape

    @validator("layers")
    def names_unique(cls, layers: List[LayerSpec]) -> List[LayerSpec]:
        """
        Ensures that layer names are unique.

        Args:
            layers: The layers.

        Returns:
            The same layers.

        """
        names = [layer.name for layer in layers]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        assert not duplicates, f"Duplicate layer names: {duplicates}."
        return layers


class NormStats(ZmosModel):
    """
    Per-bin mean and standard deviation used to normalize features.

    Attributes:
        mean: Mean of each bin.
        std: Standard deviation of each bin. Always positive.

    """

    mean: List[float]
    std: List[float]

    @root_validator(skip_on_failure=True)
    def consistent(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        """
        Ensures that the statistics match and are usable.

        Args:
            values: The field values.

        Returns:
            The same values.

        """
        assert len(values["mean"]) == len(
            values["std"]
        ), "mean and std must have the same length."
        assert all(s > 0 for s in values["std"]), "std must be positive."
        return values

    @classmethod
    def from_frames(cls, frames: np.ndarray, std_floor: float) -> "NormStats":
        """
        Computes statistics over the rows of a matrix.

        Args:
            frames: Matrix with one feature vector per row.
            std_floor: Lower bound on the standard deviation.

        Returns:
            The statistics.

        """
        return cls(
            mean=frames.mean(axis=0).tolist(),
            std=np.maximum(frames.std(axis=0), std_floor).tolist(),
        )

    def normalize(self, values: np.ndarray) -> FloatArray:
        return (values - np.asarray(self.mean)) / np.asarray(self.std)

    def denormalize(self, values: np.ndarray) -> FloatArray:
        return values * np.asarray(self.std) + np.asarray(self.mean)


class Normalization(ZmosModel):
    """
    Normalization statistics stored with a model.

    Attributes:
        input: Statistics of the model input features.
        target: Statistics of the regression targets, if the model
            predicts normalized features.

    """

    input: NormStats
    target: Optional[NormStats] = None


class TrainingMetadata(ZmosModel):
    """
    Bookkeeping about how a model was trained.

    Attributes:
        seed: Seed used for initialization and shuffling.
        epochs: Number of epochs that were run.
        loss_curve: Mean training loss after each epoch.
        val_loss_curve: Validation loss after each epoch, if a validation
            set was used.
        record_ids: IDs of the records the model was trained on.

    """

    seed: int = 0
    epochs: conint(ge=0) = 0
    loss_curve: List[float] = []
    val_loss_curve: List[float] = []
    record_ids: List[str] = []


class FeatureSpec(ZmosModel):
    """
    Describes the features a model consumes.

    Attributes:
        stft: The STFT configuration the LPS features are computed with.
        context: Number of neighboring frames on each side that are
            stacked with each frame.

    """

    stft: StftConfig = Field(default_factory=StftConfig)
    context: conint(ge=0) = 0


class TensorEntry(ZmosModel):
    """
    Location of one parameter tensor within a checkpoint file.

    Attributes:
        name: The parameter name.
        shape: The tensor shape.
        offset: Byte offset from the start of the blob section.

    """

    name: str
    shape: List[int]
    offset: conint(ge=0)

    @property
    def num_bytes(self) -> int:
        return int(np.prod(self.shape, dtype=np.int64)) * 4


class CheckpointMetadata(ZmosModel):
    """
    The JSON metadata section of a checkpoint.

    Attributes:
        kind: What the model is for, e.g. "quality_net" or "se".
        graph: The network graph.
        tensors: Directory of parameter tensors.
        normalization: Feature normalization statistics.
        training: Training bookkeeping.
        features: The features the model consumes.

    """

    kind: str
    graph: GraphSpec
    tensors: List[TensorEntry]
    normalization: Normalization
    training: TrainingMetadata = Field(default_factory=TrainingMetadata)
    features: FeatureSpec = Field(default_factory=FeatureSpec)


@dataclass(frozen=True, config=ArbitraryTypesConfig)
class ModelCheckpoint:
    """
    A model with its parameters stored at 32-bit precision, together with
    everything needed to use it.

    Attributes:
        kind: What the model is for.
        graph: The network graph.
        parameters: The parameter values, keyed by name.
        normalization: Feature normalization statistics.
        training: Training bookkeeping.
        features: The features the model consumes.

    """

    kind: str
    graph: GraphSpec
    parameters: Dict[str, np.ndarray]
    normalization: Normalization
    training: TrainingMetadata
    features: FeatureSpec

    @validator("parameters")
    def parameters_float32(
        cls, parameters: Dict[str, np.ndarray]
    ) -> Dict[str, np.ndarray]:
        """
        Converts all parameters to 32-bit floats.

        Args:
            parameters: The parameters.

        Returns:
            The converted parameters.

        """
        converted = {}
        for name, value in parameters.items():
            value = np.asarray(value, dtype=np.float32)
            assert np.all(np.isfinite(value)), f"{name} is not finite."
            converted[name] = value
        return converted
