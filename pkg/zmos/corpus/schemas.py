"""
Data types describing the desk corpus and its manifest.
"""


import enum
import math
from pathlib import Path
from typing import Any, Dict, List

import numpy as np
from pydantic import Field, root_validator, validator
from pydantic.types import confloat, conint, constr

from ..schemas import ZmosModel


@enum.unique
class Split(str, enum.Enum):
    """
    Which part of the experiment a record belongs to.
    """

    TRAIN = "train"
    TEST = "test"


@enum.unique
class NoiseType(str, enum.Enum):
    """
    Noises that the corpus builder can synthesize.
    """

    WHITE = "white"
    """
    Stationary Gaussian white noise.
    """
    PINK = "pink"
    """
    Stationary 1/f noise.
    """
    CAR = "car"
    """
    Stationary low-frequency rumble (low-passed brown noise).
    """
    ENGINE = "engine"
    """
    Non-stationary periodic pulse train over modulated broadband noise.
    """
    BABBLE = "babble"
    """
    Non-stationary sum of several detuned pseudo-speech talkers.
    """
    STREET = "street"
    """
    Non-stationary babble and pink bed with transient horn bursts.
    """


def _default_train_snrs() -> List[float]:
    return [float(snr) for snr in range(20, -11, -1)]


class NoiseTypeSets(ZmosModel):
    """
    The noise conditions used for testing.

    Attributes:
        seen: Noise types that also appear in the training data.
        unseen: Noise types that are held out of training entirely.

    """

    seen: List[NoiseType] = Field(
        default_factory=lambda: [NoiseType.WHITE, NoiseType.ENGINE],
        min_items=1,
    )
    unseen: List[NoiseType] = Field(
        default_factory=lambda: [NoiseType.CAR, NoiseType.STREET]
    )

    @root_validator(skip_on_failure=True)
    def sets_disjoint(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        """
        Ensures that no noise type is both seen and unseen.

        Args:
            values: The field values.

        Returns:
            The same values.

        """
        overlap = set(values["seen"]) & set(values["unseen"])
        assert not overlap, (
            "Seen and unseen noise types overlap: "
            f"{sorted(n.value for n in overlap)}."
        )
        return values

    @property
    def all_types(self) -> List[NoiseType]:
        """
        Seen types followed by unseen types.
        """
        return list(self.seen) + list(self.unseen)


class CorpusConfig(ZmosModel):
    """
    Configuration for synthesizing the desk corpus.

    Attributes:
        n_train_utts: Number of training utterances. Each one is mixed
            under a single noise condition.
        n_test_utts: Number of clean test utterances. Each is expanded
            across every test SNR and every test noise type.
        train_snrs_db: SNR grid that training conditions are drawn from.
        test_snrs_db: SNRs used for testing.
        noise_types: Seen and unseen test noise types.
        extra_train_noise_types: Additional noise types that are only used
            for training.
        utterance_len_s: Length of each utterance, in seconds.
        noise_len_s: Length of the noise recording generated for each
            noise type. Records crop from it.
        sample_rate: Sample rate of all generated audio.
        seed: Seed that the whole corpus is derived from.

    """

    n_train_utts: conint(ge=1) = 400
    n_test_utts: conint(ge=1) = 10
    train_snrs_db: List[float] = Field(
        default_factory=_default_train_snrs, min_items=1
    )
    test_snrs_db: List[float] = Field(
        default_factory=lambda: [15.0, 10.0, 5.0, 0.0, -5.0, -10.0],
        min_items=1,
    )
    noise_types: NoiseTypeSets = Field(default_factory=NoiseTypeSets)
    extra_train_noise_types: List[NoiseType] = Field(
        default_factory=lambda: [NoiseType.PINK, NoiseType.BABBLE]
    )
    utterance_len_s: confloat(gt=0.1) = 2.0
    noise_len_s: confloat(gt=0.0) = 20.0
    sample_rate: conint(gt=0) = 16000
    seed: conint(ge=0) = 0

    @validator("train_snrs_db", "test_snrs_db")
    def snrs_finite(cls, snrs: List[float]) -> List[float]:
        """
        Ensures that all SNRs are finite.

        Args:
            snrs: The SNR list.

        Returns:
            The same list.

        """
        assert all(math.isfinite(s) for s in snrs), "SNRs must be finite."
        return snrs

    @root_validator(skip_on_failure=True)
    def extra_types_not_unseen(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        """
        Ensures that extra training noises don't leak into the unseen set.

        Args:
            values: The field values.

        Returns:
            The same values.

        """
        leaked = set(values["extra_train_noise_types"]) & set(
            values["noise_types"].unseen
        )
        assert not leaked, (
            "Extra training noise types include unseen types: "
            f"{sorted(n.value for n in leaked)}."
        )
        return values

    @property
    def train_noise_types(self) -> List[NoiseType]:
        """
        Noise types that training conditions are drawn from, without
        duplicates, in a stable order.
        """
        pool = list(self.noise_types.seen)
        pool.extend(n for n in self.extra_train_noise_types if n not in pool)
        return pool

    @property
    def all_noise_types(self) -> List[NoiseType]:
        """
        Every noise type the corpus uses.
        """
        pool = self.train_noise_types
        pool.extend(n for n in self.noise_types.unseen if n not in pool)
        return pool

    @property
    def utterance_len(self) -> int:
        """
        Utterance length, in samples.
        """
        return int(round(self.utterance_len_s * self.sample_rate))

    @property
    def noise_len(self) -> int:
        """
        Noise recording length, in samples. Never shorter than one
        utterance.
        """
        return max(
            int(round(self.noise_len_s * self.sample_rate)),
            self.utterance_len,
        )


class UtteranceRecord(ZmosModel):
    """
    One clean/noisy pair in a manifest.

    Attributes:
        id: Unique identifier of the record.
        clean_path: The clean WAV file.
        noisy_path: The noisy WAV file.
        noise_type: The name of the noise that was mixed in.
        snr_db: The SNR the noise was mixed at.
        split: Whether this is a training or testing record.
        duration_s: Duration of the audio, in seconds.

    """

    id: constr(min_length=1)
    clean_path: Path
    noisy_path: Path
    noise_type: constr(min_length=1)
    snr_db: float
    split: Split
    duration_s: confloat(ge=0.0)

    @validator("snr_db")
    def snr_finite(cls, snr_db: float) -> float:
        """
        Ensures that the SNR is finite.

        Args:
            snr_db: The SNR.

        Returns:
            The same SNR.

        """
        assert np.isfinite(snr_db), "snr_db must be finite."
        return snr_db
