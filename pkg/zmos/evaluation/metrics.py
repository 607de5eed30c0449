"""
Objective speech metrics: STOI, segmental SNR, and the quality target that
stands in for PESQ.
"""


import warnings

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from pystoi import stoi as reference_stoi

from ..dsp import Waveform, resample
from ..errors import ZmosError

STOI_RATE = 10000
"""
Sample rate that STOI operates at.
"""
SEGSNR_FRAME = 256
SEGSNR_HOP = 128
SEGSNR_CLAMP_DB = (-10.0, 35.0)
ACTIVITY_THRESHOLD_DB = 40.0
"""
Frames whose clean energy is further than this below the loudest frame
are treated as silent.
"""
DISPLAY_OFFSET = -0.5
DISPLAY_SCALE = 5.0
"""
Affine map from the [0, 1] quality target to the [-0.5, 4.5] range that
PESQ scores are usually reported in.
"""


class MetricError(ZmosError):
    """
    Raised when a metric can't be computed for a pair of signals.
    """


def _check_pair(clean: Waveform, degraded: Waveform) -> None:
    if clean.sample_rate != degraded.sample_rate:
        raise MetricError(
            f"Sample rates differ: {clean.sample_rate} Hz vs "
            f"{degraded.sample_rate} Hz."
        )
    if len(clean) != len(degraded):
        raise MetricError(
            f"Lengths differ: {len(clean)} vs {len(degraded)} samples."
        )


def stoi(clean: Waveform, degraded: Waveform) -> float:
    """
    Computes short-time objective intelligibility. Both signals are
    resampled to 10 kHz before scoring.

    Args:
        clean: The clean reference.
        degraded: The signal to score.

    Raises:
        `MetricError` if the signals don't match, or if too few active
        frames remain to form one 384 ms segment.

    Returns:
        The STOI score, in [0, 1].

    """
    _check_pair(clean, degraded)
    clean_10k = resample(clean, STOI_RATE).samples
    degraded_10k = resample(degraded, STOI_RATE).samples

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        score = reference_stoi(clean_10k, degraded_10k, STOI_RATE)
    for warning in caught:
        if "Not enough STFT frames" in str(warning.message):
            raise MetricError(
                "Signal is too short (or too quiet) for one STOI segment."
            )

    if not np.isfinite(score):
        raise MetricError("STOI is not finite.")
    return float(np.clip(score, 0.0, 1.0))


def segmental_snr(
    clean: Waveform,
    degraded: Waveform,
    frame: int = SEGSNR_FRAME,
    hop: int = SEGSNR_HOP,
    clamp_db: tuple[float, float] = SEGSNR_CLAMP_DB,
) -> float:
    """
    Computes segmental SNR over active frames.

    Args:
        clean: The clean reference.
        degraded: The signal to score.
        frame: Frame length, in samples.
        hop: Hop between frames, in samples.
        clamp_db: Per-frame SNRs are clamped to this range.

    Raises:
        `MetricError` if the signals don't match, are shorter than one
        frame, or the clean signal has no active frames.

    Returns:
        The mean clamped per-frame SNR, in dB.

    """
    _check_pair(clean, degraded)
    if len(clean) < frame:
        raise MetricError(
            f"Signal of {len(clean)} samples is shorter than one frame."
        )

    clean_frames = sliding_window_view(clean.samples, frame)[::hop]
    error_frames = sliding_window_view(
        clean.samples - degraded.samples, frame
    )[::hop]
    clean_energy = np.sum(clean_frames**2, axis=1)
    error_energy = np.sum(error_frames**2, axis=1)

    peak = clean_energy.max()
    active = clean_energy > peak * 10.0 ** (-ACTIVITY_THRESHOLD_DB / 10.0)
    if peak == 0.0 or not np.any(active):
        raise MetricError("Clean signal has no active frames.")

    with np.errstate(divide="ignore"):
        frame_snrs = 10.0 * np.log10(
            clean_energy[active] / error_energy[active]
        )
    return float(np.mean(np.clip(frame_snrs, *clamp_db)))


def quality_target(clean: Waveform, degraded: Waveform) -> float:
    """
    The intrusive quality score that the quality predictor learns. It is
    STOI, so it lies in [0, 1].

    Args:
        clean: The clean reference.
        degraded: The signal to score.

    Raises:
        `MetricError` as for `stoi`.

    Returns:
        The quality target.

    """
    return stoi(clean, degraded)


def display_quality(quality: float | np.ndarray) -> float | np.ndarray:
    """
    Maps a quality target onto the PESQ-like display range.

    Args:
        quality: The quality target, in [0, 1].

    Returns:
        The surrogate score, in [-0.5, 4.5].

    """
    return DISPLAY_OFFSET + DISPLAY_SCALE * quality
