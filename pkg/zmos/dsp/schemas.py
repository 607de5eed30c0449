"""
Data types for waveforms and their short-time spectral representations.
"""


import enum
from typing import Any, Dict

import numpy as np
from pydantic import root_validator, validator
from pydantic.dataclasses import dataclass
from pydantic.types import confloat, conint
from scipy.signal import get_window

from ..schemas import ZmosModel
from ..type_helpers import ArbitraryTypesConfig, ComplexArray, FloatArray


@enum.unique
class WindowKind(str, enum.Enum):
    """
    Analysis windows that are supported.
    """

    HAMMING = "hamming"
    """
    Periodic (DFT-even) Hamming window.
    """


class StftConfig(ZmosModel):
    """
    Framing parameters for STFT analysis and synthesis. All sizes are in
    samples.

    Attributes:
        window_len: Length of the analysis window.
        hop: Hop between successive frames.
        fft_size: FFT length. Frames are zero-padded up to this length.
        window_kind: The analysis (and synthesis) window.
        log_floor: Additive floor used before taking the log of the power.

    """

    window_len: conint(gt=0) = 512
    hop: conint(gt=0) = 256
    fft_size: conint(gt=0) = 512
    window_kind: WindowKind = WindowKind.HAMMING
    log_floor: confloat(gt=0.0) = 1e-12

    @root_validator(skip_on_failure=True)
    def check_framing(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        """
        Checks that the frame geometry allows perfect reconstruction.

        Args:
            values: The field values.

        Returns:
            The same values.

        """
        window_len = values["window_len"]
        hop = values["hop"]
        assert (
            values["fft_size"] >= window_len
        ), "fft_size must be at least window_len."
        assert hop <= window_len, "hop must not exceed window_len."
        assert window_len % hop == 0, "hop must divide window_len."
        return values

    @property
    def n_bins(self) -> int:
        """
        Number of non-negative frequency bins kept per frame.
        """
        return self.fft_size // 2 + 1

    @property
    def log_floor_lps(self) -> float:
        """
        The smallest value an LPS entry can take.
        """
        return float(np.log(self.log_floor))

    def window(self) -> FloatArray:
        """
        Returns:
            The analysis window, of length `window_len`.

        """
        return get_window(
            self.window_kind.value, self.window_len, fftbins=True
        ).astype(np.float64)

    def num_frames(self, num_samples: int) -> int:
        """
        Args:
            num_samples: The length of a signal.

        Returns:
            The number of complete frames that fit in the signal.

        """
        if num_samples < self.window_len:
            return 0
        return 1 + (num_samples - self.window_len) // self.hop


@dataclass(frozen=True, config=ArbitraryTypesConfig)
class Waveform:
    """
    A mono audio signal.

    Attributes:
        samples: The samples, nominally in [-1, 1].
        sample_rate: The sample rate, in Hz.

    """

    samples: np.ndarray
    sample_rate: conint(gt=0)

    @validator("samples", pre=True)
    def samples_finite(cls, samples: Any) -> FloatArray:
        """
        Converts the samples to a 1-D float array and checks that they are
        finite.

        Args:
            samples: The raw samples.

        Returns:
            The samples as a float64 array.

        """
        samples = np.asarray(samples, dtype=np.float64)
        assert samples.ndim == 1, "Waveform samples must be one-dimensional."
        assert np.all(np.isfinite(samples)), "Waveform has non-finite samples."
        return samples

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        """
        Duration of the signal, in seconds.
        """
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True, config=ArbitraryTypesConfig)
class ComplexSpectrogram:
    """
    One-sided STFT of a waveform.

    Attributes:
        frames: Matrix of shape (frames, fft_size / 2 + 1).
        config: The configuration used for the analysis.
        original_len: Length of the analyzed signal, in samples.
        sample_rate: Sample rate of the analyzed signal.

    """

    frames: np.ndarray
    config: StftConfig
    original_len: conint(ge=0)
    sample_rate: conint(gt=0)

    @validator("frames", pre=True)
    def frames_finite(cls, frames: Any) -> ComplexArray:
        """
        Checks that the frames are a finite, 2-D complex matrix.

        Args:
            frames: The raw frames.

        Returns:
            The frames as a complex128 array.

        """
        frames = np.asarray(frames, dtype=np.complex128)
        assert frames.ndim == 2, "Spectrogram must be two-dimensional."
        assert np.all(np.isfinite(frames)), "Spectrogram has non-finite bins."
        return frames

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]


@dataclass(frozen=True, config=ArbitraryTypesConfig)
class LpsMatrix:
    """
    Log-power spectra, one row per frame.

    Attributes:
        values: Matrix of shape (frames, fft_size / 2 + 1).
        config: The configuration used for the analysis.

    """

    values: np.ndarray
    config: StftConfig

    @validator("values", pre=True)
    def values_finite(cls, values: Any) -> FloatArray:
        """
        Checks that the values are a finite, 2-D real matrix.

        Args:
            values: The raw values.

        Returns:
            The values as a float64 array.

        """
        values = np.asarray(values, dtype=np.float64)
        assert values.ndim == 2, "LPS must be two-dimensional."
        assert np.all(np.isfinite(values)), "LPS has non-finite entries."
        return values

    @validator("config")
    def values_above_floor(
        cls, config: StftConfig, values: Dict[str, Any]
    ) -> StftConfig:
        """
        Checks the LPS against the geometry and floor of its configuration.

        Args:
            config: The STFT configuration.
            values: The previously-validated fields.

        Returns:
            The same configuration.

        """
        lps = values.get("values")
        if lps is None:
            return config
        assert (
            lps.shape[1] == config.n_bins
        ), f"LPS has {lps.shape[1]} bins, expected {config.n_bins}."
        # Allow for rounding in exp/log round trips.
        assert np.all(
            lps >= config.log_floor_lps - 1e-9
        ), "LPS falls below the log floor."
        return config

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]
