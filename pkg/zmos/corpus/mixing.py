"""
Mixing noise into clean speech at an exact SNR.
"""


from typing import Tuple

import numpy as np
from loguru import logger

from ..dsp import Waveform
from ..errors import ZmosError


class MixingError(ZmosError):
    """
    Raised when signals cannot be mixed at the requested SNR.
    """


def signal_power(samples: np.ndarray) -> float:
    """
    Args:
        samples: The signal.

    Returns:
        The mean squared amplitude of the signal.

    """
    if len(samples) == 0:
        return 0.0
    return float(np.mean(np.square(samples)))


def crop_noise(
    noise: np.ndarray, length: int, rng: np.random.Generator
) -> np.ndarray:
    """
    Takes a random segment of a noise signal, tiling it first if it is too
    short.

    Args:
        noise: The noise signal.
        length: The length of the segment to take.
        rng: Picks the offset of the segment.

    Returns:
        The noise segment.

    """
    if len(noise) < length:
        num_tiles = -(-length // len(noise))
        noise = np.tile(noise, num_tiles)
    offset = int(rng.integers(0, len(noise) - length + 1))
    return noise[offset : offset + length]


def mix_at_snr(
    clean: Waveform, noise: Waveform, snr_db: float, seed: int
) -> Tuple[Waveform, float]:
    """
    Adds a randomly-placed segment of noise to a clean signal, scaled so
    that the power ratio over the whole segment is exactly `snr_db`.

    Args:
        clean: The clean signal.
        noise: The noise signal. It is tiled if it is shorter than the
            clean signal.
        snr_db: The target SNR.
        seed: Seed that determines the noise offset.

    Raises:
        `MixingError` if the sample rates differ, or either the clean signal
        or the noise segment is silent.

    Returns:
        The noisy signal, and the gain that was applied to the noise.

    """
    if clean.sample_rate != noise.sample_rate:
        raise MixingError(
            f"Clean rate {clean.sample_rate} Hz does not match noise rate "
            f"{noise.sample_rate} Hz."
        )
    clean_power = signal_power(clean.samples)
    if clean_power == 0.0:
        raise MixingError("Cannot mix into a silent clean signal.")
    if len(noise) == 0:
        raise MixingError("Noise signal is empty.")

    rng = np.random.default_rng(seed)
    segment = crop_noise(noise.samples, len(clean), rng)
    noise_power = signal_power(segment)
    if noise_power == 0.0:
        raise MixingError("Noise segment is silent.")

    gain = float(
        np.sqrt(clean_power / (noise_power * 10.0 ** (snr_db / 10.0)))
    )
    logger.debug("Mixing at {} dB with noise gain {}.", snr_db, gain)
    noisy = clean.samples + gain * segment
    return Waveform(samples=noisy, sample_rate=clean.sample_rate), gain


def measured_snr(clean: Waveform, residual: Waveform) -> float:
    """
    Measures the SNR of a signal against a residual.

    Args:
        clean: The reference signal.
        residual: The residual, typically `noisy - clean`.

    Raises:
        `MixingError` if the lengths differ, or either signal has no power.

    Returns:
        `10 log10(P_clean / P_residual)`, in dB.

    """
    if len(clean) != len(residual):
        raise MixingError(
            f"Clean length {len(clean)} does not match residual length "
            f"{len(residual)}."
        )
    clean_power = signal_power(clean.samples)
    residual_power = signal_power(residual.samples)
    if clean_power == 0.0:
        raise MixingError("Clean signal has zero power.")
    if residual_power == 0.0:
        raise MixingError("Residual has zero power.")
    return float(10.0 * np.log10(clean_power / residual_power))


def residual(clean: Waveform, noisy: Waveform) -> Waveform:
    """
    Args:
        clean: The clean signal.
        noisy: The noisy signal.

    Raises:
        `MixingError` if the lengths differ.

    Returns:
        The difference `noisy - clean`.

    """
    if len(clean) != len(noisy):
        raise MixingError(
            f"Clean length {len(clean)} does not match noisy length "
            f"{len(noisy)}."
        )
    return Waveform(
        samples=noisy.samples - clean.samples, sample_rate=clean.sample_rate
    )
