"""
Tests for the `checkpoint` module.
"""


import struct
from pathlib import Path

import numpy as np
import pytest
import torch
from faker import Faker

from zmos.nn import checkpoint
from zmos.nn.graph import DTYPE, ModelGraph, forward
from zmos.nn.schemas import (
    GraphSpec,
    LayerSpec,
    Normalization,
    NormStats,
    TrainingMetadata,
)


@pytest.fixture
def model_checkpoint(faker: Faker) -> checkpoint.ModelCheckpoint:
    """
    Creates a checkpoint of a small recurrent model.

    Args:
        faker: The fixture to use for generating fake data.

    Returns:
        The checkpoint.

    """
    spec = GraphSpec(
        input_shape=[1, -1, 5],
        layers=[
            LayerSpec(name="rnn", kind="blstm", hidden=3),
            LayerSpec(name="out", kind="dense", units=1, activation="tanh"),
        ],
    )
    stats = NormStats(mean=[0.5] * 5, std=[2.0] * 5)
    return checkpoint.checkpoint_from_model(
        ModelGraph(spec, seed=faker.random_int()),
        kind="test",
        normalization=Normalization(input=stats),
        training=TrainingMetadata(seed=3, epochs=2, loss_curve=[1.0, 0.5]),
    )


def test_round_trip_forward(
    model_checkpoint: checkpoint.ModelCheckpoint, tmp_path: Path
) -> None:
    """
    Tests that a reloaded model computes bit-identical outputs.

    Args:
        model_checkpoint: The checkpoint to save.
        tmp_path: The temporary directory to use.

    """
    # Arrange.
    path = tmp_path / "model.ckpt"
    x = torch.randn(1, 7, 5, generator=torch.Generator().manual_seed(0))

    # Act.
    checkpoint.save_checkpoint(model_checkpoint, path)
    loaded = checkpoint.load_checkpoint(path)

    # Assert.
    with torch.no_grad():
        expected, _ = forward(checkpoint.build_model(model_checkpoint), x)
        got, _ = forward(checkpoint.build_model(loaded), x)
    assert torch.equal(expected, got)
    assert loaded.normalization == model_checkpoint.normalization
    assert loaded.training == model_checkpoint.training
    assert loaded.graph == model_checkpoint.graph
    for name, value in model_checkpoint.parameters.items():
        np.testing.assert_array_equal(loaded.parameters[name], value)


def test_saved_bytes_deterministic(
    model_checkpoint: checkpoint.ModelCheckpoint, tmp_path: Path
) -> None:
    """
    Tests that saving the same checkpoint twice produces identical files
    with the documented header.

    Args:
        model_checkpoint: The checkpoint to save.
        tmp_path: The temporary directory to use.

    """
    # Act.
    checkpoint.save_checkpoint(model_checkpoint, tmp_path / "a.ckpt")
    checkpoint.save_checkpoint(model_checkpoint, tmp_path / "b.ckpt")

    # Assert.
    contents = (tmp_path / "a.ckpt").read_bytes()
    assert contents == (tmp_path / "b.ckpt").read_bytes()
    magic, version, metadata_len = struct.unpack("<4sIQ", contents[:16])
    assert magic == b"ZMOS"
    assert version == checkpoint.FORMAT_VERSION
    num_values = sum(v.size for v in model_checkpoint.parameters.values())
    assert len(contents) == 16 + metadata_len + 4 * num_values


def test_read_metadata_only(
    model_checkpoint: checkpoint.ModelCheckpoint, tmp_path: Path
) -> None:
    """
    Tests that metadata can be read even when the blobs are missing.

    Args:
        model_checkpoint: The checkpoint to save.
        tmp_path: The temporary directory to use.

    """
    # Arrange.
    path = tmp_path / "model.ckpt"
    checkpoint.save_checkpoint(model_checkpoint, path)
    _, _, metadata_len = struct.unpack("<4sIQ", path.read_bytes()[:16])
    path.write_bytes(path.read_bytes()[: 16 + metadata_len])

    # Act.
    metadata = checkpoint.read_checkpoint_metadata(path)

    # Assert.
    assert metadata.kind == "test"
    assert metadata.training.loss_curve == [1.0, 0.5]
    assert [t.name for t in metadata.tensors] == list(
        model_checkpoint.parameters
    )


def test_truncated_blob(
    model_checkpoint: checkpoint.ModelCheckpoint, tmp_path: Path
) -> None:
    """
    Tests that a checkpoint with missing parameter bytes is rejected.

    Args:
        model_checkpoint: The checkpoint to save.
        tmp_path: The temporary directory to use.

    """
    # Arrange.
    path = tmp_path / "model.ckpt"
    checkpoint.save_checkpoint(model_checkpoint, path)
    path.write_bytes(path.read_bytes()[:-4])

    # Act and assert.
    with pytest.raises(checkpoint.CheckpointError, match="truncated"):
        checkpoint.load_checkpoint(path)


def test_bad_magic(
    model_checkpoint: checkpoint.ModelCheckpoint, tmp_path: Path
) -> None:
    """
    Tests that corrupted magic bytes are reported along with the version.

    Args:
        model_checkpoint: The checkpoint to save.
        tmp_path: The temporary directory to use.

    """
    # Arrange.
    path = tmp_path / "model.ckpt"
    checkpoint.save_checkpoint(model_checkpoint, path)
    path.write_bytes(b"ZMQS" + path.read_bytes()[4:])

    # Act and assert.
    with pytest.raises(checkpoint.CheckpointError, match="version"):
        checkpoint.load_checkpoint(path)


def test_unsupported_version(
    model_checkpoint: checkpoint.ModelCheckpoint, tmp_path: Path
) -> None:
    """
    Tests that newer format versions are rejected.

    Args:
        model_checkpoint: The checkpoint to save.
        tmp_path: The temporary directory to use.

    """
    # Arrange.
    path = tmp_path / "model.ckpt"
    checkpoint.save_checkpoint(model_checkpoint, path)
    contents = path.read_bytes()
    path.write_bytes(contents[:4] + struct.pack("<I", 99) + contents[8:])

    # Act and assert.
    with pytest.raises(checkpoint.CheckpointError, match="99"):
        checkpoint.read_checkpoint_metadata(path)


def test_build_model_mismatch(
    model_checkpoint: checkpoint.ModelCheckpoint,
) -> None:
    """
    Tests that parameters that don't fit the graph are rejected.

    Args:
        model_checkpoint: The checkpoint to use.

    """
    # Arrange.
    parameters = dict(model_checkpoint.parameters)
    parameters["out.weight"] = np.zeros((2, 6), dtype=np.float32)
    broken = checkpoint.ModelCheckpoint(
        kind=model_checkpoint.kind,
        graph=model_checkpoint.graph,
        parameters=parameters,
        normalization=model_checkpoint.normalization,
        training=model_checkpoint.training,
        features=model_checkpoint.features,
    )

    # Act and assert.
    with pytest.raises(checkpoint.CheckpointError, match="out.weight"):
        checkpoint.build_model(broken)


def test_build_model_widens(
    model_checkpoint: checkpoint.ModelCheckpoint,
) -> None:
    """
    Tests that built models use 64-bit parameters equal to the stored
    values.

    Args:
        model_checkpoint: The checkpoint to use.

    """
    # Act.
    model = checkpoint.build_model(model_checkpoint)

    # Assert.
    for name, param in model.named_tensors().items():
        assert param.dtype == DTYPE
        np.testing.assert_array_equal(
            param.detach().numpy(),
            model_checkpoint.parameters[name].astype(np.float64),
        )
