"""
Configuration and results of the quality predictor.
"""


import enum
from typing import Any, Dict

import numpy as np
from pydantic import Field, root_validator, validator
from pydantic.dataclasses import dataclass
from pydantic.types import confloat, conint

from ..schemas import ZmosModel
from ..type_helpers import ArbitraryTypesConfig, FloatArray

TARGET_RANGE = (0.0, 1.0)
"""
Range of the quality target that the predictor learns.
"""


@enum.unique
class AlphaForm(str, enum.Enum):
    """
    Functional forms of the weight on the frame-level loss term.
    """

    CONSTANT = "constant"
    """
    The same weight for every utterance.
    """
    LINEAR = "linear"
    """
    A weight of `intercept + slope * Q`, for a target `Q`.
    """


class AlphaConfig(ZmosModel):
    """
    Weight of the frame-level term in the training objective, as a
    function of the utterance target.

    Attributes:
        form: The functional form.
        value: The weight, for the constant form.
        intercept: Weight at a target of zero, for the linear form.
        slope: Change in weight per unit of target, for the linear form.

    """

    form: AlphaForm = AlphaForm.CONSTANT
    value: confloat(ge=0.0) = 1.0
    intercept: float = 1.0
    slope: float = 0.0

    @root_validator(skip_on_failure=True)
    def non_negative_over_range(cls, values: Dict[str, Any]) -> Dict[str, Any]:
        """
        Ensures that the weight is non-negative wherever the target can be.
        A linear function only needs checking at the end points.

        Args:
            values: The field values.

        Returns:
            The same values.

        """
        if values["form"] == AlphaForm.LINEAR:
            for target in TARGET_RANGE:
                weight = values["intercept"] + values["slope"] * target
                assert weight >= 0.0, (
                    f"alpha is negative ({weight}) at a target of "
                    f"{target}."
                )
        return values

    def weight(self, target: float) -> float:
        """
        Evaluates the weight.

        Args:
            target: The utterance target.

        Returns:
            The weight.

        """
        if self.form == AlphaForm.CONSTANT:
            return self.value
        return self.intercept + self.slope * target


class QualityNetConfig(ZmosModel):
    """
    Architecture and training parameters of the quality predictor.

    Attributes:
        blstm_hidden: Hidden size of each BLSTM direction.
        blstm_layers: Number of stacked BLSTM layers. With zero, every
            frame is scored independently.
        embed_dim: Width of the per-frame quality embedding.
        alpha: Weight of the frame-level loss term.
        target_metric: The intrusive metric the predictor learns.
        epochs: Passes over the training set.
        lr: Adam learning rate.
        batch_size: Utterances per update.
        seed: Seed for initialization, the validation split and shuffling.
        val_fraction: Fraction of the records held out for validation.
        std_floor: Lower bound on the per-bin standard deviation used for
            input normalization.

    """

    blstm_hidden: conint(gt=0) = 32
    blstm_layers: conint(ge=0) = 1
    embed_dim: conint(gt=0) = 64
    alpha: AlphaConfig = Field(default_factory=AlphaConfig)
    target_metric: str = "stoi"
    epochs: conint(ge=0) = 30
    lr: confloat(gt=0.0) = 1e-3
    batch_size: conint(gt=0) = 8
    seed: int = 0
    val_fraction: confloat(ge=0.0, lt=1.0) = 0.1
    std_floor: confloat(gt=0.0) = 1e-5

    @validator("target_metric")
    def metric_supported(cls, target_metric: str) -> str:
        """
        Ensures that the target metric is one we can compute.

        Args:
            target_metric: The metric name.

        Returns:
            The same name.

        """
        assert target_metric == "stoi", "Only 'stoi' targets are supported."
        return target_metric


@dataclass(frozen=True, config=ArbitraryTypesConfig)
class QualityResult:
    """
    Output of the quality predictor for one utterance.

    Attributes:
        frame_scores: The predicted quality of every frame.
        frame_embeddings: The quality embedding of every frame, one row per
            frame.
        utterance_embedding: Temporal mean of the frame embeddings.
        utterance_score: The predicted utterance quality, which is always
            the mean of the frame scores.

    """

    frame_scores: np.ndarray
    frame_embeddings: np.ndarray
    utterance_embedding: np.ndarray
    utterance_score: float

    @validator(
        "frame_scores", "frame_embeddings", "utterance_embedding", pre=True
    )
    def arrays_finite(cls, array: Any) -> FloatArray:
        """
        Converts an output to a float array and checks that it is finite.

        Args:
            array: The raw output.

        Returns:
            The output as a float64 array.

        """
        array = np.asarray(array, dtype=np.float64)
        assert np.all(np.isfinite(array)), "Output has non-finite values."
        return array

    @validator("frame_embeddings")
    def one_embedding_per_frame(
        cls, frame_embeddings: np.ndarray, values: Dict[str, Any]
    ) -> np.ndarray:
        """
        Checks that there is one embedding for every frame score.

        Args:
            frame_embeddings: The frame embeddings.
            values: The previously-validated fields.

        Returns:
            The same embeddings.

        """
        scores = values.get("frame_scores")
        if scores is None:
            return frame_embeddings
        assert scores.ndim == 1 and len(scores) > 0, "Need >= 1 frame."
        assert frame_embeddings.shape[0] == len(
            scores
        ), "Need one embedding per frame."
        return frame_embeddings

    @validator("utterance_score")
    def score_is_mean(cls, score: float, values: Dict[str, Any]) -> float:
        """
        Checks that the utterance score is the mean of the frame scores.

        Args:
            score: The utterance score.
            values: The previously-validated fields.

        Returns:
            The same score.

        """
        scores = values.get("frame_scores")
        if scores is not None:
            assert score == float(
                np.mean(scores)
            ), "utterance_score must be the mean of the frame scores."
        return score

    @classmethod
    def from_frames(
        cls, frame_scores: np.ndarray, frame_embeddings: np.ndarray
    ) -> "QualityResult":
        """
        Pools frame-level outputs into an utterance-level result.

        Args:
            frame_scores: The score of every frame.
            frame_embeddings: The embedding of every frame.

        Returns:
            The result.

        """
        frame_scores = np.asarray(frame_scores, dtype=np.float64)
        frame_embeddings = np.asarray(frame_embeddings, dtype=np.float64)
        return cls(
            utterance_score=float(np.mean(frame_scores)),
            frame_scores=frame_scores,
            frame_embeddings=frame_embeddings,
            utterance_embedding=frame_embeddings.mean(axis=0),
        )

    @property
    def num_frames(self) -> int:
        return len(self.frame_scores)
