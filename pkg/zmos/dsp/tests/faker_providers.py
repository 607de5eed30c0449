"""
Contains custom `Faker` providers.
"""


import numpy as np
from faker.providers import BaseProvider

from ..schemas import Waveform


class AudioProvider(BaseProvider):
    """
    Faker provider for faking audio signals.
    """

    def numpy_rng(self) -> np.random.Generator:
        """
        Returns:
            A numpy generator seeded from the Faker random state, so that
            fake signals are reproducible under `Faker.seed()`.

        """
        return np.random.default_rng(self.random_int(0, 2**31 - 1))

    def noise_waveform(
        self,
        num_samples: int = 16000,
        sample_rate: int = 16000,
        scale: float = 0.25,
    ) -> Waveform:
        """
        Creates a waveform of Gaussian noise, clipped to [-1, 1].

        Args:
            num_samples: Length of the signal.
            sample_rate: The sample rate.
            scale: Standard deviation of the noise.

        Returns:
            The waveform it created.

        """
        samples = self.numpy_rng().normal(scale=scale, size=num_samples)
        return Waveform(
            samples=np.clip(samples, -1.0, 1.0), sample_rate=sample_rate
        )

    def tone(
        self,
        frequency_hz: float,
        num_samples: int = 16000,
        sample_rate: int = 16000,
        amplitude: float = 0.5,
    ) -> Waveform:
        """
        Creates a pure cosine tone.

        Args:
            frequency_hz: The frequency of the tone.
            num_samples: Length of the signal.
            sample_rate: The sample rate.
            amplitude: Peak amplitude.

        Returns:
            The waveform it created.

        """
        time_s = np.arange(num_samples) / sample_rate
        samples = amplitude * np.cos(2 * np.pi * frequency_hz * time_s)
        return Waveform(samples=samples, sample_rate=sample_rate)
