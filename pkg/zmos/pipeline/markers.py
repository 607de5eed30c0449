"""
Stage-complete markers and the hash-based staleness rules built on them.
"""


from pathlib import Path
from typing import Dict, List

from loguru import logger
from pydantic import ValidationError

from ..errors import ZmosError
from ..hashing import sha256_file, sha256_json
from .schemas import ExperimentConfig, Stage, StageMarker

MARKER_NAME = "stage_complete.json"

STAGE_PREREQUISITES: Dict[Stage, List[Stage]] = {
    Stage.SYNTH: [],
    Stage.TRAIN_QNET: [Stage.SYNTH],
    Stage.CLUSTER: [Stage.SYNTH, Stage.TRAIN_QNET],
    Stage.TRAIN_SE: [Stage.SYNTH, Stage.TRAIN_QNET, Stage.CLUSTER],
    Stage.ENHANCE: [Stage.SYNTH, Stage.TRAIN_QNET, Stage.TRAIN_SE],
    Stage.EVALUATE: [Stage.SYNTH, Stage.ENHANCE],
    Stage.REPORT: [Stage.SYNTH, Stage.ENHANCE, Stage.EVALUATE],
}
"""
Stages whose artifacts each stage reads.
"""

STAGE_SECTIONS: Dict[Stage, List[str]] = {
    Stage.SYNTH: ["corpus"],
    Stage.TRAIN_QNET: ["stft", "qnet"],
    Stage.CLUSTER: ["stft", "zmos"],
    Stage.TRAIN_SE: ["stft", "se", "zmos"],
    Stage.ENHANCE: ["zmos"],
    Stage.EVALUATE: ["corpus"],
    Stage.REPORT: ["corpus", "evaluation"],
}
"""
Configuration sections that each stage's output depends on.
"""


class MissingPrerequisiteError(ZmosError):
    """
    Raised when a stage runs before a stage it depends on.
    """


class StaleInputError(ZmosError):
    """
    Raised when a prerequisite's artifacts no longer match its inputs, its
    configuration, or the hashes it recorded.
    """


def stage_dir(root: Path, stage: Stage) -> Path:
    return root / stage.value


def hash_artifacts(directory: Path) -> Dict[str, str]:
    """
    Args:
        directory: A stage directory.

    Returns:
        The hash of every file below the directory, except the marker, by
        relative POSIX path.

    """
    return {
        path.relative_to(directory).as_posix(): sha256_file(path)
        for path in sorted(directory.rglob("*"))
        if path.is_file() and path.name != MARKER_NAME
    }


def config_sha256(config: ExperimentConfig, stage: Stage) -> str:
    """
    Args:
        config: The configuration.
        stage: The stage.

    Returns:
        A hash of the configuration sections that the stage depends on.

    """
    return sha256_json(config.section_values(STAGE_SECTIONS[stage]))


def read_marker(root: Path, stage: Stage) -> StageMarker | None:
    """
    Args:
        root: The experiment root.
        stage: The stage.

    Returns:
        The marker of the stage, or None if it hasn't completed or the
        marker is unreadable.

    """
    path = stage_dir(root, stage) / MARKER_NAME
    if not path.is_file():
        return None
    try:
        return StageMarker.read_json(path)
    except (ValidationError, ValueError) as err:
        logger.warning("Ignoring unreadable marker {}: {}", path, err)
        return None


def _marker_sha256(root: Path, stage: Stage) -> str:
    return sha256_file(stage_dir(root, stage) / MARKER_NAME)


def current_inputs(root: Path, stage: Stage) -> Dict[Stage, str]:
    """
    Args:
        root: The experiment root.
        stage: The stage.

    Raises:
        `MissingPrerequisiteError` if a prerequisite hasn't completed.

    Returns:
        The marker hash of every prerequisite.

    """
    inputs = {}
    for prerequisite in STAGE_PREREQUISITES[stage]:
        if read_marker(root, prerequisite) is None:
            raise MissingPrerequisiteError(
                f"Stage '{stage.value}' needs the output of "
                f"'{prerequisite.value}'. Run 'zmos {prerequisite.value}' "
                f"first."
            )
        inputs[prerequisite] = _marker_sha256(root, prerequisite)
    return inputs


def staleness(
    root: Path, stage: Stage, config: ExperimentConfig
) -> str | None:
    """
    Decides whether a stage's output is current.

    Args:
        root: The experiment root.
        stage: The stage.
        config: The configuration.

    Returns:
        Why the stage needs to run, or None if its output is current.

    """
    marker = read_marker(root, stage)
    if marker is None:
        return "it has not completed"
    if marker.config_sha256 != config_sha256(config, stage):
        return "its configuration changed"
    try:
        inputs = current_inputs(root, stage)
    except MissingPrerequisiteError as err:
        return str(err)
    if marker.inputs != inputs:
        changed = sorted(
            s.value for s in inputs if marker.inputs.get(s) != inputs[s]
        )
        return f"its inputs from {changed} changed"
    if marker.artifacts != hash_artifacts(stage_dir(root, stage)):
        return "its artifacts were modified"
    return None


def check_prerequisites(
    root: Path, stage: Stage, config: ExperimentConfig
) -> Dict[Stage, str]:
    """
    Makes sure that every prerequisite has completed and is current.

    Args:
        root: The experiment root.
        stage: The stage about to run.
        config: The configuration.

    Raises:
        `MissingPrerequisiteError` if a prerequisite hasn't completed.
        `StaleInputError` if a prerequisite's output is out of date.

    Returns:
        The marker hash of every prerequisite.

    """
    inputs = current_inputs(root, stage)
    for prerequisite in STAGE_PREREQUISITES[stage]:
        reason = staleness(root, prerequisite, config)
        if reason is not None:
            raise StaleInputError(
                f"Output of '{prerequisite.value}' is stale because "
                f"{reason}. Run 'zmos {prerequisite.value}' again."
            )
    return inputs


def write_marker(
    root: Path,
    stage: Stage,
    config: ExperimentConfig,
    inputs: Dict[Stage, str],
) -> StageMarker:
    """
    Records that a stage completed.

    Args:
        root: The experiment root.
        stage: The stage.
        config: The configuration it ran with.
        inputs: The marker hash of every prerequisite.

    Returns:
        The marker.

    """
    directory = stage_dir(root, stage)
    marker = StageMarker(
        stage=stage,
        config_sha256=config_sha256(config, stage),
        inputs=inputs,
        artifacts=hash_artifacts(directory),
    )
    marker.write_json(directory / MARKER_NAME)
    return marker
