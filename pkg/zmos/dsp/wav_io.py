"""
Reading and writing RIFF/WAVE files.
"""


import enum
from pathlib import Path

import numpy as np
import soundfile as sf
from loguru import logger
from scipy.io import wavfile

from ..errors import ZmosError
from .schemas import Waveform

_PCM_16_SCALE = 32768.0
"""
Scale between 16-bit integer PCM codes and floating-point samples.
"""
_WAV_FORMATS = {"WAV", "WAVEX"}
"""
Container formats reported by libsndfile that are RIFF/WAVE files.
"""


class WavNotFoundError(ZmosError, FileNotFoundError):
    """
    Raised when a WAV file does not exist.
    """


class WavFormatError(ZmosError):
    """
    Raised when a file is not a valid RIFF/WAVE file.
    """


class UnsupportedEncodingError(ZmosError):
    """
    Raised when a WAV file uses a sample encoding we can't read.
    """


class WavWriteError(ZmosError):
    """
    Raised when a WAV file cannot be written.
    """


@enum.unique
class WavSubtype(str, enum.Enum):
    """
    Sample encodings that can be read and written. Values are the
    libsndfile subtype names.
    """

    PCM_16 = "PCM_16"
    FLOAT = "FLOAT"


def load_waveform(path: Path) -> Waveform:
    """
    Loads a WAV file. Multichannel files are reduced to their first
    channel.

    Args:
        path: The file to load.

    Raises:
        `WavNotFoundError` if the file does not exist, `WavFormatError` if
        it is not a valid WAV file, or `UnsupportedEncodingError` if it
        is not 16-bit PCM or 32-bit float.

    Returns:
        The loaded waveform. 16-bit samples are scaled by 1/32768.

    """
    path = Path(path)
    if not path.is_file():
        raise WavNotFoundError(f"WAV file {path} does not exist.")

    try:
        info = sf.info(path.as_posix())
    except RuntimeError as err:
        raise WavFormatError(f"Could not parse {path}: {err}") from err
    if info.format not in _WAV_FORMATS:
        raise WavFormatError(f"{path} is a {info.format} file, not RIFF/WAVE.")

    try:
        subtype = WavSubtype(info.subtype)
    except ValueError:
        raise UnsupportedEncodingError(
            f"{path} uses unsupported encoding {info.subtype}."
        )

    try:
        if subtype == WavSubtype.PCM_16:
            data, sample_rate = sf.read(
                path.as_posix(), dtype="int16", always_2d=True
            )
            samples = data[:, 0].astype(np.float64) / _PCM_16_SCALE
        else:
            data, sample_rate = sf.read(
                path.as_posix(), dtype="float32", always_2d=True
            )
            samples = data[:, 0].astype(np.float64)
    except RuntimeError as err:
        raise WavFormatError(f"Could not read {path}: {err}") from err

    if data.shape[1] > 1:
        logger.warning(
            "{} has {} channels, using only the first.", path, data.shape[1]
        )
    if not np.all(np.isfinite(samples)):
        raise WavFormatError(f"{path} contains non-finite samples.")

    logger.debug(
        "Loaded {} samples at {} Hz from {}.", len(samples), sample_rate, path
    )
    return Waveform(samples=samples, sample_rate=sample_rate)


def save_waveform(
    waveform: Waveform,
    path: Path,
    *,
    subtype: WavSubtype = WavSubtype.PCM_16,
) -> int:
    """
    Saves a waveform as a mono WAV file.

    Args:
        waveform: The waveform to save.
        path: Where to save it.
        subtype: The sample encoding. For 16-bit PCM, samples outside
            [-1, 1] are hard-clipped.

    Raises:
        `WavWriteError` if the file cannot be written.

    Returns:
        The number of samples that were clipped.

    """
    path = Path(path)
    samples = waveform.samples
    num_clipped = 0

    if subtype == WavSubtype.PCM_16:
        num_clipped = int(np.count_nonzero(np.abs(samples) > 1.0))
        if num_clipped > 0:
            logger.warning(
                "Clipped {} out-of-range samples while writing {}.",
                num_clipped,
                path,
            )
        codes = np.round(np.clip(samples, -1.0, 1.0) * _PCM_16_SCALE)
        data = np.clip(codes, -32768, 32767).astype(np.int16)
    else:
        data = samples.astype(np.float32)

    try:
        if subtype == WavSubtype.PCM_16:
            sf.write(
                path.as_posix(),
                data,
                waveform.sample_rate,
                subtype=subtype.value,
                format="WAV",
            )
        else:
            # No timestamped PEAK chunk, unlike libsndfile.
            wavfile.write(path.as_posix(), waveform.sample_rate, data)
    except (OSError, RuntimeError, ValueError) as err:
        raise WavWriteError(f"Could not write {path}: {err}") from err

    return num_clipped
