"""
Checkpoint container: a small binary header, JSON metadata, and raw
little-endian 32-bit parameter blobs.

Layout:

    b"ZMOS" | version (u32 LE) | metadata length (u64 LE) | metadata (UTF-8
    JSON) | parameter blobs

"""


import struct
from pathlib import Path
from typing import BinaryIO, Tuple

import numpy as np
import torch
from loguru import logger
from pydantic import ValidationError

from ..errors import ZmosError
from .graph import DTYPE, ModelGraph
from .schemas import (
    CheckpointMetadata,
    FeatureSpec,
    ModelCheckpoint,
    Normalization,
    TensorEntry,
    TrainingMetadata,
)

MAGIC = b"ZMOS"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIQ")
_BLOB_DTYPE = np.dtype("<f4")


class CheckpointError(ZmosError):
    """
    Raised when a checkpoint file is not valid.
    """


def checkpoint_from_model(
    model: ModelGraph,
    *,
    kind: str,
    normalization: Normalization,
    training: TrainingMetadata | None = None,
    features: FeatureSpec | None = None,
) -> ModelCheckpoint:
    """
    Captures a model's parameters at checkpoint precision.

    Args:
        model: The model.
        kind: What the model is for.
        normalization: The feature normalization statistics.
        training: Training bookkeeping.
        features: The features the model consumes.

    Returns:
        The checkpoint.

    """
    parameters = {
        name: param.detach().cpu().numpy().astype(np.float32)
        for name, param in model.named_tensors().items()
    }
    return ModelCheckpoint(
        kind=kind,
        graph=model.spec,
        parameters=parameters,
        normalization=normalization,
        training=training or TrainingMetadata(),
        features=features or FeatureSpec(),
    )


@torch.no_grad()
def build_model(checkpoint: ModelCheckpoint) -> ModelGraph:
    """
    Creates a model from a checkpoint. Parameters are widened to 64 bits,
    so every model built from the same checkpoint computes identical
    outputs.

    Args:
        checkpoint: The checkpoint.

    Raises:
        `CheckpointError` if the stored parameters don't match the graph.

    Returns:
        The model.

    """
    model = ModelGraph(checkpoint.graph)
    tensors = model.named_tensors()
    if set(tensors) != set(checkpoint.parameters):
        raise CheckpointError(
            "Checkpoint parameters "
            f"{sorted(checkpoint.parameters)} do not match the graph's "
            f"{sorted(tensors)}."
        )
    for name, param in tensors.items():
        value = checkpoint.parameters[name]
        if tuple(value.shape) != tuple(param.shape):
            raise CheckpointError(
                f"Parameter {name} has shape {list(value.shape)}, expected "
                f"{list(param.shape)}."
            )
        param.copy_(torch.from_numpy(value.astype(np.float64)).to(DTYPE))
    return model


def save_checkpoint(checkpoint: ModelCheckpoint, path: Path) -> None:
    """
    Writes a checkpoint. Files are a pure function of the checkpoint
    contents.

    Args:
        checkpoint: The checkpoint to save.
        path: Where to save it.

    """
    entries = []
    blobs = []
    offset = 0
    for name, value in checkpoint.parameters.items():
        blob = value.astype(_BLOB_DTYPE).tobytes(order="C")
        entries.append(
            TensorEntry(name=name, shape=list(value.shape), offset=offset)
        )
        blobs.append(blob)
        offset += len(blob)

    metadata = CheckpointMetadata(
        kind=checkpoint.kind,
        graph=checkpoint.graph,
        tensors=entries,
        normalization=checkpoint.normalization,
        training=checkpoint.training,
        features=checkpoint.features,
    )
    metadata_bytes = metadata.json().encode("utf8")

    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("wb") as checkpoint_file:
        checkpoint_file.write(
            _HEADER.pack(MAGIC, FORMAT_VERSION, len(metadata_bytes))
        )
        checkpoint_file.write(metadata_bytes)
        for blob in blobs:
            checkpoint_file.write(blob)
    logger.debug("Saved {} checkpoint to {}.", checkpoint.kind, path)


def _read_metadata(
    checkpoint_file: BinaryIO, path: Path
) -> Tuple[CheckpointMetadata, int]:
    """
    Reads the header and metadata.

    Args:
        checkpoint_file: The open file, positioned at the start.
        path: The file path, for error messages.

    Raises:
        `CheckpointError` if the header or metadata is invalid.

    Returns:
        The metadata, and the byte offset where the blobs start.

    """
    header = checkpoint_file.read(_HEADER.size)
    if len(header) < _HEADER.size:
        raise CheckpointError(f"{path} is truncated: incomplete header.")
    magic, version, metadata_len = _HEADER.unpack(header)
    if magic != MAGIC:
        raise CheckpointError(
            f"{path} is not a checkpoint (bad magic {magic!r}, format "
            f"version {FORMAT_VERSION} expected)."
        )
    if version != FORMAT_VERSION:
        raise CheckpointError(
            f"{path} has format version {version}, but only version "
            f"{FORMAT_VERSION} is supported."
        )

    metadata_bytes = checkpoint_file.read(metadata_len)
    if len(metadata_bytes) < metadata_len:
        raise CheckpointError(f"{path} is truncated: incomplete metadata.")
    try:
        metadata = CheckpointMetadata.parse_raw(metadata_bytes)
    except ValidationError as err:
        raise CheckpointError(f"{path} has invalid metadata: {err}") from err
    return metadata, _HEADER.size + metadata_len


def read_checkpoint_metadata(path: Path) -> CheckpointMetadata:
    """
    Reads only the metadata of a checkpoint, without loading any
    parameters.

    Args:
        path: The checkpoint file.

    Raises:
        `CheckpointError` if the file is not a valid checkpoint.

    Returns:
        The metadata.

    """
    with Path(path).open("rb") as checkpoint_file:
        metadata, _ = _read_metadata(checkpoint_file, path)
    return metadata


def load_checkpoint(path: Path) -> ModelCheckpoint:
    """
    Loads a complete checkpoint.

    Args:
        path: The checkpoint file.

    Raises:
        `CheckpointError` if the file is not a valid checkpoint or is
        truncated.

    Returns:
        The checkpoint.

    """
    path = Path(path)
    if not path.is_file():
        raise CheckpointError(f"Checkpoint {path} does not exist.")

    with path.open("rb") as checkpoint_file:
        metadata, _ = _read_metadata(checkpoint_file, path)
        blobs = checkpoint_file.read()

    parameters = {}
    for entry in metadata.tensors:
        end = entry.offset + entry.num_bytes
        if end > len(blobs):
            raise CheckpointError(
                f"{path} is truncated: tensor {entry.name} needs bytes "
                f"{entry.offset}..{end}, but only {len(blobs)} are present."
            )
        parameters[entry.name] = (
            np.frombuffer(blobs[entry.offset : end], dtype=_BLOB_DTYPE)
            .reshape(entry.shape)
            .astype(np.float32)
        )

    return ModelCheckpoint(
        kind=metadata.kind,
        graph=metadata.graph,
        parameters=parameters,
        normalization=metadata.normalization,
        training=metadata.training,
        features=metadata.features,
    )
