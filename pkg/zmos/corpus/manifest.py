"""
Reading and writing JSON-lines manifests of utterance records.
"""


import json
from pathlib import Path
from typing import Dict, Iterable, List

from loguru import logger
from pydantic import ValidationError

from ..errors import ZmosError
from .schemas import Split, UtteranceRecord


class ManifestError(ZmosError):
    """
    Raised when a manifest is malformed or inconsistent.
    """


class MissingAudioError(ManifestError, FileNotFoundError):
    """
    Raised when a manifest references an audio file that does not exist.
    """


def _relative_to(path: Path, base: Path) -> Path:
    try:
        return path.relative_to(base)
    except ValueError:
        return path


def write_manifest(records: Iterable[UtteranceRecord], path: Path) -> None:
    """
    Writes records as JSON lines. Paths under the manifest's directory are
    stored relative to it, so the corpus can be moved as a whole.

    Args:
        records: The records to write, in order.
        path: The manifest file.

    """
    base = path.parent
    lines = []
    for record in records:
        portable = record.copy(
            update=dict(
                clean_path=_relative_to(record.clean_path, base),
                noisy_path=_relative_to(record.noisy_path, base),
            )
        )
        lines.append(portable.json())

    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf8")
    logger.debug("Wrote {} records to {}.", len(lines), path)


def load_manifest(
    path: Path, *, check_files: bool = True
) -> List[UtteranceRecord]:
    """
    Loads and validates a manifest. Blank lines are ignored.

    Args:
        path: The manifest file.
        check_files: If true, make sure that every referenced WAV exists.

    Raises:
        `ManifestError` if a line can't be parsed or validated, or if a
        record ID is repeated. `MissingAudioError` if a referenced file is
        missing.

    Returns:
        The records, with relative paths resolved against the manifest's
        directory.

    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"Manifest {path} does not exist.")
    base = path.parent

    records = []
    first_lines: Dict[str, int] = {}
    text = path.read_text(encoding="utf8")
    for line_num, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue

        try:
            record = UtteranceRecord.parse_obj(json.loads(line))
        except json.JSONDecodeError as err:
            raise ManifestError(
                f"{path}:{line_num}: invalid JSON: {err.msg}"
            ) from err
        except ValidationError as err:
            raise ManifestError(
                f"{path}:{line_num}: invalid record: {err}"
            ) from err

        if record.id in first_lines:
            raise ManifestError(
                f"{path}:{line_num}: duplicate record id '{record.id}' "
                f"(first defined on line {first_lines[record.id]})."
            )
        first_lines[record.id] = line_num

        record = record.copy(
            update=dict(
                clean_path=base / record.clean_path,
                noisy_path=base / record.noisy_path,
            )
        )
        if check_files:
            for audio_path in (record.clean_path, record.noisy_path):
                if not audio_path.is_file():
                    raise MissingAudioError(
                        f"{path}:{line_num}: record '{record.id}' "
                        f"references missing file {audio_path}."
                    )
        records.append(record)

    logger.debug("Loaded {} records from {}.", len(records), path)
    return records


def filter_split(
    records: Iterable[UtteranceRecord], split: Split
) -> List[UtteranceRecord]:
    """
    Args:
        records: The records to filter.
        split: The split to keep.

    Returns:
        Only the records that belong to `split`, in their original order.

    """
    return [r for r in records if r.split == split]
