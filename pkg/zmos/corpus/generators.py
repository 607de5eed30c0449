"""
Seeded generators for pseudo-speech and the noise roster.
"""


from typing import Callable, Dict

import numpy as np
from scipy.signal import butter, lfilter, sosfilt

from ..dsp import Waveform
from .schemas import NoiseType

NoiseGenerator = Callable[[np.random.Generator, int, int], np.ndarray]
"""
Signature of a noise generator: `(rng, num_samples, sample_rate)` to raw
samples.
"""

NOISE_RMS = 0.1
"""
RMS level that all generated noise recordings are normalized to.
"""
_MAX_HARMONICS = 40
_PINK_B = np.array([0.049922035, -0.095993537, 0.050612699, -0.004408786])
_PINK_A = np.array([1.0, -2.494956002, 2.017265875, -0.522189400])
"""
Coefficients of a filter with an approximately 1/f power response.
"""
_FORMANT_RANGES_HZ = ((300.0, 800.0), (900.0, 2200.0), (2300.0, 3200.0))


def _normalize(samples: np.ndarray, rms: float) -> np.ndarray:
    """
    Scales a signal to a target RMS level. Silent signals are returned
    unchanged.

    Args:
        samples: The signal.
        rms: The target RMS.

    Returns:
        The scaled signal.

    """
    current = np.sqrt(np.mean(np.square(samples))) if len(samples) else 0.0
    if current == 0.0:
        return samples
    return samples * (rms / current)


def _syllable_envelope(
    rng: np.random.Generator, num_samples: int, sample_rate: int
) -> np.ndarray:
    """
    Creates an amplitude envelope made of syllable-like bumps separated by
    pauses, with silence at both ends.

    Args:
        rng: The random generator.
        num_samples: Length of the envelope.
        sample_rate: The sample rate.

    Returns:
        The envelope, in [0, 1].

    """
    envelope = np.zeros(num_samples)
    margin = int(rng.uniform(0.05, 0.15) * sample_rate)
    position = min(margin, num_samples // 4)
    end = num_samples - min(margin, num_samples // 4)

    while position < end:
        length = int(rng.uniform(0.12, 0.35) * sample_rate)
        length = min(length, end - position)
        if length < 8:
            break
        level = rng.uniform(0.5, 1.0)
        envelope[position : position + length] = level * np.hanning(length)
        position += length
        # Mostly short gaps, with the occasional longer pause.
        gap_s = (
            rng.uniform(0.25, 0.5)
            if rng.random() < 0.15
            else rng.uniform(0.03, 0.12)
        )
        position += int(gap_s * sample_rate)

    if not np.any(envelope):
        # Too short for the syllable loop. Use one bump over the middle.
        envelope[:] = np.hanning(num_samples)
    return envelope


def pseudo_speech(
    rng: np.random.Generator, num_samples: int, sample_rate: int
) -> np.ndarray:
    """
    Synthesizes a speech-like signal: a harmonic stack with a drifting
    pitch and formant-shaped spectrum, gated by a syllabic envelope, plus
    a little aspiration noise.

    Args:
        rng: The random generator.
        num_samples: Length of the signal.
        sample_rate: The sample rate.

    Returns:
        The signal, normalized to a random RMS level.

    """
    time_s = np.arange(num_samples) / sample_rate
    base_f0 = rng.uniform(90.0, 240.0)
    drift = 1.0 + 0.12 * np.sin(
        2 * np.pi * rng.uniform(0.3, 1.5) * time_s + rng.uniform(0, 2 * np.pi)
    )
    # Slow random jitter on top of the sinusoidal drift.
    jitter = lfilter([0.002], [1.0, -0.998], rng.normal(size=num_samples))
    f0 = base_f0 * np.clip(drift + jitter, 0.7, 1.3)
    phase = 2 * np.pi * np.cumsum(f0) / sample_rate

    formants = [rng.uniform(low, high) for low, high in _FORMANT_RANGES_HZ]
    nyquist_guard = 0.45 * sample_rate
    voiced = np.zeros(num_samples)
    for harmonic in range(1, _MAX_HARMONICS + 1):
        frequency = harmonic * base_f0
        if frequency > nyquist_guard:
            break
        weight = sum(
            np.exp(-0.5 * ((frequency - formant) / 150.0) ** 2)
            for formant in formants
        )
        amplitude = (0.2 + weight) / harmonic
        audible = harmonic * f0 < nyquist_guard
        voiced += (
            amplitude
            * audible
            * np.sin(harmonic * phase + rng.uniform(0, 2 * np.pi))
        )

    envelope = _syllable_envelope(rng, num_samples, sample_rate)
    aspiration = sosfilt(
        butter(2, 2000.0, btype="highpass", fs=sample_rate, output="sos"),
        rng.normal(size=num_samples),
    )
    signal = envelope * (
        _normalize(voiced, 1.0) + 0.05 * _normalize(aspiration, 1.0)
    )
    return _normalize(signal, rng.uniform(0.03, 0.08))


def white_noise(
    rng: np.random.Generator, num_samples: int, sample_rate: int
) -> np.ndarray:
    return rng.normal(size=num_samples)


def pink_noise(
    rng: np.random.Generator, num_samples: int, sample_rate: int
) -> np.ndarray:
    return lfilter(_PINK_B, _PINK_A, rng.normal(size=num_samples))


def car_noise(
    rng: np.random.Generator, num_samples: int, sample_rate: int
) -> np.ndarray:
    """
    Low-frequency rumble: leaky-integrated (brown) noise, low-passed.
    """
    brown = lfilter([1.0], [1.0, -0.995], rng.normal(size=num_samples))
    cutoff_hz = rng.uniform(200.0, 400.0)
    return sosfilt(
        butter(4, cutoff_hz, btype="lowpass", fs=sample_rate, output="sos"),
        brown,
    )


def engine_noise(
    rng: np.random.Generator, num_samples: int, sample_rate: int
) -> np.ndarray:
    """
    Engine-like noise: resonant firing pulses whose rate wanders slowly,
    over broadband noise modulated at the firing rate.
    """
    time_s = np.arange(num_samples) / sample_rate
    firing_hz = rng.uniform(25.0, 45.0) * (
        1.0
        + 0.3
        * np.sin(
            2 * np.pi * rng.uniform(0.05, 0.2) * time_s
            + rng.uniform(0, 2 * np.pi)
        )
    )
    cycles = np.cumsum(firing_hz) / sample_rate
    pulses = np.diff(np.floor(cycles), prepend=0.0)

    resonance_hz = rng.uniform(80.0, 160.0)
    radius = 0.995
    theta = 2 * np.pi * resonance_hz / sample_rate
    rumble = lfilter(
        [1.0], [1.0, -2 * radius * np.cos(theta), radius**2], pulses
    )

    modulation = 0.5 + 0.5 * np.cos(2 * np.pi * cycles)
    broadband = modulation * rng.normal(size=num_samples)
    return _normalize(rumble, 1.0) + 0.5 * _normalize(broadband, 1.0)


def babble_noise(
    rng: np.random.Generator, num_samples: int, sample_rate: int
) -> np.ndarray:
    """
    Several pseudo-speech talkers at once.
    """
    num_talkers = int(rng.integers(5, 9))
    babble = np.zeros(num_samples)
    for _ in range(num_talkers):
        babble += _normalize(pseudo_speech(rng, num_samples, sample_rate), 1.0)
    return babble


def street_noise(
    rng: np.random.Generator, num_samples: int, sample_rate: int
) -> np.ndarray:
    """
    Background babble over a pink bed, with occasional horn bursts.
    """
    bed = _normalize(
        babble_noise(rng, num_samples, sample_rate), 1.0
    ) + _normalize(pink_noise(rng, num_samples, sample_rate), 1.0)

    duration_s = num_samples / sample_rate
    num_horns = int(rng.poisson(duration_s / 4.0)) + 1
    for _ in range(num_horns):
        length = min(int(rng.uniform(0.2, 0.8) * sample_rate), num_samples)
        start = int(rng.integers(0, num_samples - length + 1))
        horn_hz = rng.uniform(350.0, 500.0)
        time_s = np.arange(length) / sample_rate
        horn = sum(
            np.sin(2 * np.pi * k * horn_hz * time_s) / k for k in (1, 2, 3)
        )
        bed[start : start + length] += 3.0 * np.hanning(length) * horn
    return bed


NOISE_GENERATORS: Dict[NoiseType, NoiseGenerator] = {
    NoiseType.WHITE: white_noise,
    NoiseType.PINK: pink_noise,
    NoiseType.CAR: car_noise,
    NoiseType.ENGINE: engine_noise,
    NoiseType.BABBLE: babble_noise,
    NoiseType.STREET: street_noise,
}
"""
Maps each noise type to the function that synthesizes it.
"""


def generate_noise(
    noise_type: NoiseType,
    rng: np.random.Generator,
    num_samples: int,
    sample_rate: int,
) -> Waveform:
    """
    Generates a noise recording.

    Args:
        noise_type: The kind of noise.
        rng: The random generator.
        num_samples: Length of the recording.
        sample_rate: The sample rate.

    Returns:
        The noise, normalized to `NOISE_RMS`.

    """
    samples = NOISE_GENERATORS[noise_type](rng, num_samples, sample_rate)
    return Waveform(
        samples=_normalize(samples, NOISE_RMS), sample_rate=sample_rate
    )


def generate_clean(
    rng: np.random.Generator, num_samples: int, sample_rate: int
) -> Waveform:
    """
    Generates a clean pseudo-speech utterance.

    Args:
        rng: The random generator.
        num_samples: Length of the utterance.
        sample_rate: The sample rate.

    Returns:
        The utterance.

    """
    return Waveform(
        samples=pseudo_speech(rng, num_samples, sample_rate),
        sample_rate=sample_rate,
    )
