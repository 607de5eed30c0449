"""
Tests for the `graph` module.
"""


from typing import List

import numpy as np
import pytest
import torch
from faker import Faker

from zmos.nn import graph
from zmos.nn.gradcheck import max_relative_error
from zmos.nn.optim import AdamState, adam_step
from zmos.nn.schemas import GraphSpec, LayerSpec


def _spec(input_shape: List[int], *layers: dict) -> GraphSpec:
    return GraphSpec(
        input_shape=input_shape,
        layers=[LayerSpec(**layer) for layer in layers],
    )


def _random(shape, generator: torch.Generator) -> torch.Tensor:
    return torch.randn(*shape, generator=generator, dtype=graph.DTYPE)


def test_dense_identity(faker: Faker) -> None:
    """
    Tests that a dense layer with identity weights passes its input through.

    Args:
        faker: The fixture to use for generating fake data.

    """
    # Arrange.
    width = faker.random_int(2, 10)
    model = graph.ModelGraph(
        _spec([-1, width], dict(name="dense", kind="dense", units=width))
    )
    with torch.no_grad():
        model.named_tensors()["dense.weight"].copy_(torch.eye(width))
    x = _random((3, width), torch.Generator().manual_seed(0))

    # Act.
    y, tape = graph.forward(model, x)

    # Assert.
    assert torch.equal(y, x)
    assert list(tape.activations) == ["dense"]


def test_conv2d_impulse() -> None:
    """
    Tests that a unit impulse reproduces the flipped kernel, which is the
    cross-correlation convention.

    """
    # Arrange.
    model = graph.ModelGraph(
        _spec(
            [1, 1, 7, 7],
            dict(name="conv", kind="conv2d", channels=1, kernel=(3, 3)),
        )
    )
    kernel = torch.arange(9, dtype=graph.DTYPE).reshape(3, 3)
    with torch.no_grad():
        model.named_tensors()["conv.weight"].copy_(kernel[None, None])
    impulse = torch.zeros(1, 1, 7, 7, dtype=graph.DTYPE)
    impulse[0, 0, 3, 3] = 1.0

    # Act.
    with torch.no_grad():
        y, _ = graph.forward(model, impulse)

    # Assert.
    patch = y[0, 0, 2:5, 2:5]
    assert torch.equal(patch, torch.flip(kernel, dims=(0, 1)))
    assert y.abs().sum() == kernel.sum()


def test_conv2d_stride_shapes() -> None:
    """
    Tests that frequency strides shrink only the frequency axis, with the
    sizes used by the enhancement models.

    """
    # Arrange.
    layers = [
        dict(name=f"conv{i}", kind="conv2d", channels=2, stride=(1, 3))
        for i in range(4)
    ]

    # Act.
    model = graph.ModelGraph(_spec([-1, 1, 5, 257], *layers))
    with torch.no_grad():
        y, _ = graph.forward(model, torch.zeros(2, 1, 5, 257))

    # Assert.
    assert model.output_shape == (-1, 2, 5, 4)
    assert y.shape == (2, 2, 5, 4)


def test_blstm_single_step_symmetric(faker: Faker) -> None:
    """
    Tests that both directions agree on a single frame when they share
    weights.

    Args:
        faker: The fixture to use for generating fake data.

    """
    # Arrange.
    hidden = faker.random_int(1, 6)
    model = graph.ModelGraph(
        _spec([1, -1, 4], dict(name="rnn", kind="blstm", hidden=hidden)),
        seed=faker.random_int(),
    )
    tensors = model.named_tensors()
    with torch.no_grad():
        for name in list(tensors):
            if name.endswith("_reverse"):
                tensors[name].copy_(tensors[name.removesuffix("_reverse")])
    x = _random((1, 1, 4), torch.Generator().manual_seed(1))

    # Act.
    with torch.no_grad():
        y, _ = graph.forward(model, x)

    # Assert.
    assert y.shape == (1, 1, 2 * hidden)
    assert torch.allclose(y[..., :hidden], y[..., hidden:], atol=0.0)


def test_blstm_forget_bias() -> None:
    """
    Tests that LSTM forget-gate biases start at 1 and all others at 0.

    """
    # Act.
    model = graph.ModelGraph(
        _spec([1, -1, 4], dict(name="rnn", kind="blstm", hidden=3))
    )

    # Assert.
    tensors = model.named_tensors()
    for direction in ("", "_reverse"):
        bias_ih = tensors[f"rnn.bias_ih_l0{direction}"]
        assert torch.equal(bias_ih[3:6], torch.ones(3, dtype=graph.DTYPE))
        assert not bias_ih[:3].any() and not bias_ih[6:].any()
        assert not tensors[f"rnn.bias_hh_l0{direction}"].any()


def test_initialization_bounds_and_seed() -> None:
    """
    Tests that weights respect the initialization bound and depend only on
    the seed.

    """
    # Arrange.
    spec = _spec([-1, 30], dict(name="dense", kind="dense", units=20))

    # Act.
    first = graph.ModelGraph(spec, seed=5).named_tensors()["dense.weight"]
    second = graph.ModelGraph(spec, seed=5).named_tensors()["dense.weight"]
    other = graph.ModelGraph(spec, seed=6).named_tensors()["dense.weight"]

    # Assert.
    assert first.abs().max() <= np.sqrt(6 / 50)
    assert torch.equal(first, second)
    assert not torch.equal(first, other)


def test_input_contract() -> None:
    """
    Tests that inputs that break the contract are rejected.

    """
    # Arrange.
    model = graph.ModelGraph(
        _spec([-1, 3], dict(name="dense", kind="dense", units=2))
    )

    # Act and assert.
    with pytest.raises(graph.ShapeError):
        graph.forward(model, torch.zeros(2, 4))
    with pytest.raises(graph.ShapeError):
        graph.forward(model, torch.zeros(2, 3, 1))


def test_incompatible_layers() -> None:
    """
    Tests that incompatible adjacent layers are rejected at construction.

    """
    # Act and assert.
    with pytest.raises(graph.ShapeError, match="rnn"):
        graph.ModelGraph(
            _spec(
                [-1, 1, 5, 8],
                dict(name="conv", kind="conv2d", channels=2),
                dict(name="rnn", kind="blstm", hidden=2),
            )
        )
    with pytest.raises(graph.ShapeError, match="flat"):
        graph.ModelGraph(_spec([-1, -1, 8], dict(name="flat", kind="flatten")))


def test_non_finite_activation() -> None:
    """
    Tests that a NaN in the input is reported as a non-finite activation.

    """
    # Arrange.
    model = graph.ModelGraph(
        _spec([-1, 2], dict(name="dense", kind="dense", units=2))
    )
    x = torch.tensor([[1.0, float("nan")]], dtype=graph.DTYPE)

    # Act and assert.
    with pytest.raises(graph.NonFiniteError, match="dense"):
        graph.forward(model, x)


def test_forward_deterministic(faker: Faker) -> None:
    """
    Tests that repeated forward passes give identical outputs.

    Args:
        faker: The fixture to use for generating fake data.

    """
    # Arrange.
    model = graph.ModelGraph(
        _spec(
            [1, -1, 6],
            dict(name="rnn", kind="blstm", hidden=4),
            dict(name="out", kind="dense", units=1, activation="sigmoid"),
        ),
        seed=faker.random_int(),
    )
    x = _random((1, 9, 6), torch.Generator().manual_seed(2))

    # Act.
    with torch.no_grad():
        first, _ = graph.forward(model, x)
        second, _ = graph.forward(model, x)

    # Assert.
    assert torch.equal(first, second)


_GRADCHECK_CASES = {
    "dense": (
        [2, 3],
        dict(name="hidden", kind="dense", units=4, activation="tanh"),
        dict(name="out", kind="dense", units=2),
    ),
    "conv2d": (
        [1, 1, 4, 5],
        dict(
            name="conv",
            kind="conv2d",
            channels=2,
            stride=(1, 2),
            activation="tanh",
        ),
    ),
    "blstm": ([1, 4, 2], dict(name="rnn", kind="blstm", hidden=3)),
    "activations": (
        [2, 3],
        dict(name="dense", kind="dense", units=3),
        dict(name="sigmoid", kind="activation", activation="sigmoid"),
        dict(name="flat", kind="flatten"),
    ),
}


@pytest.mark.parametrize("case", list(_GRADCHECK_CASES))
def test_backward_gradcheck(case: str) -> None:
    """
    Tests analytic gradients against finite differences over ten seeds.

    Args:
        case: The name of the graph to check.

    """
    input_shape, *layers = _GRADCHECK_CASES[case]
    for seed in range(10):
        # Arrange.
        model = graph.ModelGraph(_spec(input_shape, *layers), seed=seed)
        generator = torch.Generator().manual_seed(seed)
        x = _random(input_shape, generator)
        y, tape = graph.forward(model, x)
        upstream = _random(y.shape, generator)

        def objective() -> float:
            output, _ = graph.forward(model, x)
            return float((output * upstream).sum())

        # Act.
        gradients = graph.backward(tape, upstream.detach())

        # Assert.
        tensors = dict(model.named_tensors(), input=x)
        assert set(gradients) == set(tensors)
        error = max_relative_error(objective, tensors, gradients)
        assert error < 1e-4, f"seed {seed}: {error}"


def test_backward_shape_mismatch() -> None:
    """
    Tests that an upstream gradient of the wrong shape is rejected.

    """
    # Arrange.
    model = graph.ModelGraph(
        _spec([-1, 3], dict(name="dense", kind="dense", units=2))
    )
    _, tape = graph.forward(model, torch.zeros(4, 3))

    # Act and assert.
    with pytest.raises(graph.ShapeError):
        graph.backward(tape, torch.zeros(4, 3))


def test_backward_without_gradients() -> None:
    """
    Tests that tapes recorded under `no_grad` can't be back-propagated.

    """
    # Arrange.
    model = graph.ModelGraph(
        _spec([-1, 3], dict(name="dense", kind="dense", units=2))
    )
    with torch.no_grad():
        y, tape = graph.forward(model, torch.zeros(4, 3))

    # Act and assert.
    with pytest.raises(graph.ZmosError):
        graph.backward(tape, torch.ones_like(y))


def test_linear_regression_converges() -> None:
    """
    Tests that forward, backward and Adam together fit a linear model to
    noiseless linear data.

    """
    # Arrange.
    generator = torch.Generator().manual_seed(0)
    inputs = _random((64, 3), generator)
    true_weight = torch.tensor([[0.5, -1.5, 2.0]], dtype=graph.DTYPE)
    targets = inputs @ true_weight.T + 0.25
    model = graph.ModelGraph(
        _spec([-1, 3], dict(name="linear", kind="dense", units=1))
    )
    state = AdamState()

    # Act.
    for step in range(3000):
        outputs, tape = graph.forward(model, inputs)
        upstream = 2 * (outputs - targets).detach() / len(inputs)
        gradients = graph.backward(tape, upstream)
        lr = 0.01 if step < 2000 else 0.001
        adam_step(model.named_tensors(), gradients, state, lr)

    # Assert.
    with torch.no_grad():
        outputs, _ = graph.forward(model, inputs)
    mse = float(((outputs - targets) ** 2).mean())
    assert mse < 1e-6
    assert state.steps == 3000
