"""
Exporting spectrograms as CSV matrices and grayscale images.
"""


from pathlib import Path
from typing import Tuple

import numpy as np
from loguru import logger
from PIL import Image

from ..dsp import StftConfig, Waveform, lps, stft


def lps_to_image(values: np.ndarray) -> Image.Image:
    """
    Converts an LPS matrix into an 8-bit grayscale image, with time on the
    horizontal axis and low frequencies at the bottom.

    Args:
        values: The LPS matrix, one row per frame.

    Returns:
        The image. A matrix with no dynamic range maps to uniform black.

    """
    low = values.min()
    span = values.max() - low
    if span > 0.0:
        scaled = np.round((values - low) / span * 255.0)
    else:
        scaled = np.zeros_like(values)
    pixels = np.flipud(scaled.T).astype(np.uint8)
    return Image.fromarray(pixels, mode="L")


def export_spectrogram(
    waveform: Waveform, path: Path, config: StftConfig
) -> Tuple[Path, Path]:
    """
    Saves the LPS of a signal as a CSV matrix (one row per frame) and as a
    binary PGM image.

    Args:
        waveform: The signal.
        path: Base path for the outputs. The suffix is replaced by ".csv"
            and ".pgm".
        config: The STFT configuration.

    Returns:
        The paths of the CSV file and the image.

    """
    values = lps(stft(waveform, config)).values
    csv_path = path.with_suffix(".csv")
    pgm_path = path.with_suffix(".pgm")
    path.parent.mkdir(parents=True, exist_ok=True)

    np.savetxt(csv_path, values, delimiter=",", fmt="%.9g")
    lps_to_image(values).save(pgm_path, format="PPM")
    logger.debug("Exported spectrogram to {} and {}.", csv_path, pgm_path)
    return csv_path, pgm_path
