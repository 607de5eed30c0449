"""
Band-limited sample rate conversion.
"""


from math import gcd

import numpy as np
from scipy.signal import resample_poly

from ..errors import ZmosError
from .schemas import Waveform

_KAISER_BETA = 10.0
"""
Shape parameter of the Kaiser window used to design the anti-aliasing
filter. Gives well over 60 dB of stopband attenuation.
"""


class ResampleError(ZmosError):
    """
    Raised for invalid resampling requests.
    """


def resample(waveform: Waveform, target_rate: int) -> Waveform:
    """
    Resamples a waveform with a polyphase windowed-sinc filter.

    Args:
        waveform: The signal to resample.
        target_rate: The new sample rate, in Hz.

    Raises:
        `ResampleError` if the target rate is not positive.

    Returns:
        The resampled signal, of length
        `round(len * target_rate / sample_rate)`.

    """
    if target_rate <= 0:
        raise ResampleError(f"Invalid target rate {target_rate} Hz.")
    source_rate = waveform.sample_rate
    if target_rate == source_rate:
        return waveform

    divisor = gcd(target_rate, source_rate)
    up = target_rate // divisor
    down = source_rate // divisor
    target_len = int(round(len(waveform) * target_rate / source_rate))
    if len(waveform) == 0:
        return Waveform(samples=np.zeros(0), sample_rate=target_rate)

    resampled = resample_poly(
        waveform.samples, up, down, window=("kaiser", _KAISER_BETA)
    )
    samples = np.zeros(target_len)
    keep = min(target_len, len(resampled))
    samples[:keep] = resampled[:keep]
    return Waveform(samples=samples, sample_rate=target_rate)
