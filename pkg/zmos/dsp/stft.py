"""
STFT analysis, log-power spectra, and weighted overlap-add synthesis.
"""


import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ZmosError
from .schemas import ComplexSpectrogram, LpsMatrix, StftConfig, Waveform

_WINDOW_SUM_FLOOR = 1e-8
"""
Lower bound on the running sum of squared windows used to normalize
the overlap-add output.
"""


class StftError(ZmosError):
    """
    Raised when a signal or spectrogram is inconsistent with its framing.
    """


def stft(waveform: Waveform, config: StftConfig) -> ComplexSpectrogram:
    """
    Computes the one-sided short-time Fourier transform. Only complete
    frames are analyzed; the signal is never padded.

    Args:
        waveform: The signal to analyze.
        config: The framing parameters.

    Raises:
        `StftError` if the signal is shorter than one window.

    Returns:
        The spectrogram, with `1 + (len - window_len) // hop` frames.

    """
    if len(waveform) < config.window_len:
        raise StftError(
            f"Signal of {len(waveform)} samples is shorter than one "
            f"{config.window_len}-sample window."
        )

    segments = sliding_window_view(waveform.samples, config.window_len)
    segments = segments[:: config.hop] * config.window()
    frames = np.fft.rfft(segments, n=config.fft_size, axis=1)

    return ComplexSpectrogram(
        frames=frames,
        config=config,
        original_len=len(waveform),
        sample_rate=waveform.sample_rate,
    )


def istft(spectrogram: ComplexSpectrogram) -> Waveform:
    """
    Inverts a spectrogram with weighted overlap-add. The synthesis window is
    the analysis window, and the output is normalized by the running sum of
    squared windows.

    Args:
        spectrogram: The spectrogram to invert.

    Raises:
        `StftError` if the spectrogram dimensions don't match its
        configuration.

    Returns:
        The reconstructed signal, with the original length.

    """
    config = spectrogram.config
    num_frames, num_bins = spectrogram.frames.shape
    if num_bins != config.n_bins:
        raise StftError(
            f"Spectrogram has {num_bins} bins, expected {config.n_bins}."
        )
    if num_frames != config.num_frames(spectrogram.original_len):
        raise StftError(
            f"Spectrogram has {num_frames} frames, but a signal of "
            f"{spectrogram.original_len} samples has "
            f"{config.num_frames(spectrogram.original_len)}."
        )

    window = config.window()
    segments = np.fft.irfft(spectrogram.frames, n=config.fft_size, axis=1)
    segments = segments[:, : config.window_len] * window

    output_len = (num_frames - 1) * config.hop + config.window_len
    starts = np.arange(num_frames) * config.hop
    indices = starts[:, np.newaxis] + np.arange(config.window_len)

    signal = np.zeros(output_len)
    window_sum = np.zeros(output_len)
    np.add.at(signal, indices, segments)
    np.add.at(window_sum, indices, np.broadcast_to(window**2, indices.shape))
    signal /= np.maximum(window_sum, _WINDOW_SUM_FLOOR)

    samples = np.zeros(spectrogram.original_len)
    keep = min(output_len, spectrogram.original_len)
    samples[:keep] = signal[:keep]
    return Waveform(samples=samples, sample_rate=spectrogram.sample_rate)


def lps(spectrogram: ComplexSpectrogram) -> LpsMatrix:
    """
    Computes log-power spectra, `ln(|bin|^2 + log_floor)`.

    Args:
        spectrogram: The spectrogram.

    Returns:
        The LPS features.

    """
    power = np.abs(spectrogram.frames) ** 2
    return LpsMatrix(
        values=np.log(power + spectrogram.config.log_floor),
        config=spectrogram.config,
    )


def lps_magnitude(features: LpsMatrix) -> np.ndarray:
    """
    Inverts the LPS transform back to linear magnitudes.

    Args:
        features: The LPS features.

    Returns:
        The magnitude of every bin.

    """
    power = np.exp(features.values) - features.config.log_floor
    return np.sqrt(np.maximum(power, 0.0))


def reconstruct_with_noisy_phase(
    enhanced: LpsMatrix, noisy: ComplexSpectrogram
) -> Waveform:
    """
    Synthesizes a waveform from enhanced magnitudes and the phase of the
    noisy input.

    Args:
        enhanced: The enhanced LPS features.
        noisy: The spectrogram of the noisy input.

    Raises:
        `StftError` if the two don't have the same shape.

    Returns:
        The enhanced waveform.

    """
    if enhanced.values.shape != noisy.frames.shape:
        raise StftError(
            f"Enhanced LPS shape {enhanced.values.shape} does not match "
            f"noisy spectrogram shape {noisy.frames.shape}."
        )

    phase = np.exp(1j * np.angle(noisy.frames))
    frames = lps_magnitude(enhanced) * phase
    return istft(
        ComplexSpectrogram(
            frames=frames,
            config=noisy.config,
            original_len=noisy.original_len,
            sample_rate=noisy.sample_rate,
        )
    )
