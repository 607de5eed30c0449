"""
The training objective of the quality predictor.
"""


from typing import Sequence

import numpy as np
import torch

from ..nn import DTYPE
from .model import QualityNetError
from .schemas import AlphaConfig, QualityResult


def utterance_loss(
    target: float, frame_scores: torch.Tensor, alpha: AlphaConfig
) -> torch.Tensor:
    """
    Computes the objective for one utterance: the squared error of the
    utterance score, plus the weighted mean squared error of the frame
    scores, both against the utterance target.

    Args:
        target: The true utterance quality.
        frame_scores: The predicted frame scores, of shape (frames,).
        alpha: Weight of the frame-level term.

    Returns:
        The loss, as a differentiable scalar.

    """
    utterance_score = frame_scores.mean()
    frame_term = ((target - frame_scores) ** 2).mean()
    return (target - utterance_score) ** 2 + alpha.weight(target) * frame_term


def quality_net_loss(
    true_scores: Sequence[float],
    results: Sequence[QualityResult],
    alpha: AlphaConfig,
) -> float:
    """
    Computes the objective averaged over a batch of utterances.

    Args:
        true_scores: The true quality of each utterance.
        results: The prediction for each utterance.
        alpha: Weight of the frame-level term.

    Raises:
        `QualityNetError` if the batch is empty, the lengths don't match,
        or the loss isn't finite.

    Returns:
        The batch loss.

    """
    if not results:
        raise QualityNetError("Cannot compute the loss of an empty batch.")
    if len(true_scores) != len(results):
        raise QualityNetError(
            f"Got {len(true_scores)} targets for {len(results)} predictions."
        )

    losses = [
        utterance_loss(
            float(target),
            torch.as_tensor(result.frame_scores, dtype=DTYPE),
            alpha,
        )
        for target, result in zip(true_scores, results)
    ]
    loss = float(torch.stack(losses).mean())
    if not np.isfinite(loss):
        raise QualityNetError("Loss is not finite.")
    return loss
