"""
Audio I/O and STFT-domain feature extraction.
"""


from .resample import ResampleError, resample
from .schemas import (
    ComplexSpectrogram,
    LpsMatrix,
    StftConfig,
    Waveform,
    WindowKind,
)
from .stft import (
    StftError,
    istft,
    lps,
    lps_magnitude,
    reconstruct_with_noisy_phase,
    stft,
)
from .wav_io import (
    UnsupportedEncodingError,
    WavFormatError,
    WavNotFoundError,
    WavSubtype,
    WavWriteError,
    load_waveform,
    save_waveform,
)
