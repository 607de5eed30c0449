"""
Network graphs built from layer specifications, with taped forward passes
and reverse-mode gradients.
"""


import math
from typing import Callable, Dict, List, Tuple

import torch
import torch.nn.functional as F
from loguru import logger
from pydantic.dataclasses import dataclass
from torch import nn

from ..errors import ZmosError
from ..type_helpers import ArbitraryTypesConfig
from .schemas import (
    FREE_DIM,
    ActivationName,
    GraphSpec,
    LayerKind,
    LayerSpec,
)

Shape = Tuple[int, ...]

_ACTIVATIONS: Dict[ActivationName, Callable[[torch.Tensor], torch.Tensor]] = {
    ActivationName.RELU: torch.relu,
    ActivationName.TANH: torch.tanh,
    ActivationName.SIGMOID: torch.sigmoid,
    ActivationName.IDENTITY: lambda x: x,
}

DTYPE = torch.float64
"""
Precision used for all model math.
"""


class ShapeError(ZmosError):
    """
    Raised when a tensor or layer does not match a shape contract.
    """


class NonFiniteError(ZmosError):
    """
    Raised when an activation or gradient contains NaN or infinity.
    """


class Dense(nn.Module):
    """
    Affine map over the last axis, then an activation.
    """

    def __init__(
        self, in_features: int, units: int, activation: ActivationName
    ):
        super().__init__()
        self.weight = nn.Parameter(
            torch.empty(units, in_features, dtype=DTYPE)
        )
        self.bias = nn.Parameter(torch.zeros(units, dtype=DTYPE))
        self.activation = activation

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return _ACTIVATIONS[self.activation](
            F.linear(x, self.weight, self.bias)
        )


class Conv2d(nn.Module):
    """
    Cross-correlation over (time, frequency): output bin (t, f) is the sum of
    `weight[t', f'] * x[t + t' - kt // 2, f * stride + f' - kf // 2]`, with
    zero padding, so a unit impulse reproduces the kernel *flipped*. The
    time axis is padded to keep its length.
    """

    def __init__(
        self,
        in_channels: int,
        channels: int,
        kernel: Tuple[int, int],
        stride: Tuple[int, int],
        activation: ActivationName,
    ):
        super().__init__()
        self.weight = nn.Parameter(
            torch.empty(channels, in_channels, *kernel, dtype=DTYPE)
        )
        self.bias = nn.Parameter(torch.zeros(channels, dtype=DTYPE))
        self.stride = stride
        self.padding = (kernel[0] // 2, kernel[1] // 2)
        self.activation = activation

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        y = F.conv2d(
            x,
            self.weight,
            self.bias,
            stride=self.stride,
            padding=self.padding,
        )
        return _ACTIVATIONS[self.activation](y)


class BLSTM(nn.LSTM):
    """
    Bidirectional single-layer LSTM over (batch, time, features). The
    forward and backward hidden states are concatenated for every frame.
    """

    def __init__(self, in_features: int, hidden: int):
        super().__init__(
            in_features,
            hidden,
            batch_first=True,
            bidirectional=True,
            dtype=DTYPE,
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        output, _ = super().forward(x)
        return output


class Activation(nn.Module):
    """
    Element-wise nonlinearity.
    """

    def __init__(self, activation: ActivationName):
        super().__init__()
        self.activation = activation

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return _ACTIVATIONS[self.activation](x)


def _known(dim: int) -> bool:
    return dim != FREE_DIM


def _build_layer(spec: LayerSpec, in_shape: Shape) -> Tuple[nn.Module, Shape]:
    """
    Creates the module for one layer, and infers its output shape.

    Args:
        spec: The layer specification.
        in_shape: The shape of the layer input.

    Raises:
        `ShapeError` if the input shape is not compatible with the layer.

    Returns:
        The module, and the shape of its output.

    """

    def require(condition: bool, message: str) -> None:
        if not condition:
            raise ShapeError(
                f"Layer '{spec.name}' ({spec.kind.value}) cannot take input "
                f"of shape {list(in_shape)}: {message}"
            )

    if spec.kind == LayerKind.DENSE:
        require(_known(in_shape[-1]), "the last axis must be fixed.")
        module = Dense(in_shape[-1], spec.units, spec.activation)
        return module, in_shape[:-1] + (spec.units,)

    if spec.kind == LayerKind.CONV2D:
        require(len(in_shape) == 4, "expected (batch, channels, time, freq).")
        _, in_channels, time, freq = in_shape
        require(_known(in_channels), "the channel axis must be fixed.")
        require(_known(freq), "the frequency axis must be fixed.")
        module = Conv2d(
            in_channels,
            spec.channels,
            spec.kernel,
            spec.stride,
            spec.activation,
        )
        pad_t, pad_f = module.padding
        stride_t, stride_f = spec.stride
        out_time = (
            (time + 2 * pad_t - spec.kernel[0]) // stride_t + 1
            if _known(time)
            else FREE_DIM
        )
        out_freq = (freq + 2 * pad_f - spec.kernel[1]) // stride_f + 1
        require(out_freq > 0, "the kernel is larger than the input.")
        return module, (in_shape[0], spec.channels, out_time, out_freq)

    if spec.kind == LayerKind.BLSTM:
        require(len(in_shape) == 3, "expected (batch, time, features).")
        require(_known(in_shape[-1]), "the feature axis must be fixed.")
        module = BLSTM(in_shape[-1], spec.hidden)
        return module, in_shape[:2] + (2 * spec.hidden,)

    if spec.kind == LayerKind.FLATTEN:
        require(len(in_shape) >= 2, "there is nothing to flatten.")
        require(
            all(_known(d) for d in in_shape[1:]),
            "all non-batch axes must be fixed.",
        )
        return nn.Flatten(start_dim=1), (in_shape[0], math.prod(in_shape[1:]))

    return Activation(spec.activation), in_shape


class ModelGraph(nn.Module):
    """
    A linear stack of layers built from a `GraphSpec`. All parameters are
    64-bit.
    """

    def __init__(self, spec: GraphSpec, *, seed: int = 0):
        """
        Args:
            spec: The graph specification.
            seed: Seed for parameter initialization.

        Raises:
            `ShapeError` if adjacent layers are not compatible.

        """
        super().__init__()
        self.spec = spec
        self.layers = nn.ModuleDict()

        shape = tuple(spec.input_shape)
        for layer_spec in spec.layers:
            module, shape = _build_layer(layer_spec, shape)
            self.layers[layer_spec.name] = module
        self.output_shape: Shape = shape

        initialize_parameters(self, seed)
        logger.debug(
            "Built graph with {} layers and {} parameters.",
            len(spec.layers),
            sum(p.numel() for p in self.parameters()),
        )

    def named_tensors(self) -> Dict[str, nn.Parameter]:
        """
        Returns:
            Every parameter, named `<layer>.<parameter>`, in a fixed order.

        """
        prefix = "layers."
        return {
            name.removeprefix(prefix): param
            for name, param in self.named_parameters()
        }

    def check_input(self, x: torch.Tensor) -> None:
        """
        Checks a tensor against the input contract.

        Args:
            x: The input.

        Raises:
            `ShapeError` if it doesn't match.

        """
        contract = self.spec.input_shape
        matches = len(x.shape) == len(contract) and all(
            c == FREE_DIM or c == d for c, d in zip(contract, x.shape)
        )
        if not matches:
            raise ShapeError(
                f"Input of shape {list(x.shape)} does not match the "
                f"contract {contract}."
            )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        output, _ = forward(self, x)
        return output


def _uniform_(
    tensor: torch.Tensor,
    fan_in: int,
    fan_out: int,
    generator: torch.Generator,
) -> None:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    tensor.uniform_(-bound, bound, generator=generator)


@torch.no_grad()
def initialize_parameters(model: ModelGraph, seed: int) -> None:
    """
    Initializes weights uniformly in `±sqrt(6 / (fan_in + fan_out))`, with
    zero biases, except for the LSTM forget gates, whose biases are 1.

    Args:
        model: The model to initialize in-place.
        seed: The seed to use.

    """
    generator = torch.Generator().manual_seed(seed)
    for module in model.layers.values():
        if isinstance(module, Dense):
            units, in_features = module.weight.shape
            _uniform_(module.weight, in_features, units, generator)
            module.bias.zero_()

        elif isinstance(module, Conv2d):
            out_channels, in_channels, kernel_t, kernel_f = module.weight.shape
            receptive = kernel_t * kernel_f
            _uniform_(
                module.weight,
                in_channels * receptive,
                out_channels * receptive,
                generator,
            )
            module.bias.zero_()

        elif isinstance(module, BLSTM):
            hidden = module.hidden_size
            for name, param in module.named_parameters():
                if name.startswith("weight"):
                    gates, fan_in = param.shape
                    _uniform_(param, fan_in, gates, generator)
                else:
                    param.zero_()
                    if name.startswith("bias_ih"):
                        # Gate order is input, forget, cell, output.
                        param[hidden : 2 * hidden] = 1.0


@dataclass(frozen=True, config=ArbitraryTypesConfig)
class Tape:
    """
    Intermediate results of a forward pass, kept for `backward`.

    Attributes:
        input: The input, as a leaf tensor.
        activations: The output of every layer, keyed by layer name.
        output: The final output.
        parameters: The parameters the output depends on.

    """

    input: torch.Tensor
    activations: Dict[str, torch.Tensor]
    output: torch.Tensor
    parameters: Dict[str, torch.Tensor]

    @property
    def records_gradients(self) -> bool:
        return self.output.requires_grad


def _check_finite(tensor: torch.Tensor, what: str) -> None:
    if not torch.isfinite(tensor).all():
        raise NonFiniteError(f"{what} contains non-finite values.")


def forward(model: ModelGraph, x: torch.Tensor) -> Tuple[torch.Tensor, Tape]:
    """
    Runs the model, recording every layer output. Gradients are only
    recorded when autograd is enabled.

    Args:
        model: The model.
        x: The input.

    Raises:
        `ShapeError` if the input does not match the model's contract, or
        `NonFiniteError` if any layer produces NaN or infinity.

    Returns:
        The output, and the tape.

    """
    model.check_input(x)
    x = x.detach().to(DTYPE).requires_grad_(torch.is_grad_enabled())

    activations = {}
    current = x
    for name, module in model.layers.items():
        current = module(current)
        _check_finite(current, f"Output of layer '{name}'")
        activations[name] = current

    tape = Tape(
        input=x,
        activations=activations,
        output=current,
        parameters=model.named_tensors(),
    )
    return current, tape


def backward(tape: Tape, upstream: torch.Tensor) -> Dict[str, torch.Tensor]:
    """
    Back-propagates a gradient through a recorded forward pass. A tape can
    only be consumed once.

    Args:
        tape: The tape from `forward`.
        upstream: Gradient of the objective with respect to the output.

    Raises:
        `ShapeError` if the upstream gradient doesn't match the output,
        `NonFiniteError` if any gradient is not finite, or `ZmosError` if
        the tape was recorded without gradients.

    Returns:
        The gradient for every parameter, plus the input under the name
        "input".

    """
    if not tape.records_gradients:
        raise ZmosError("Tape was recorded with gradients disabled.")
    if upstream.shape != tape.output.shape:
        raise ShapeError(
            f"Upstream gradient shape {list(upstream.shape)} does not match "
            f"output shape {list(tape.output.shape)}."
        )

    names: List[str] = list(tape.parameters)
    sources = [tape.input] + [tape.parameters[n] for n in names]
    gradients = torch.autograd.grad(
        tape.output,
        sources,
        grad_outputs=upstream.to(DTYPE),
        allow_unused=True,
    )

    named = {}
    for name, source, gradient in zip(["input"] + names, sources, gradients):
        if gradient is None:
            gradient = torch.zeros_like(source)
        _check_finite(gradient, f"Gradient of '{name}'")
        named[name] = gradient
    return named
