"""
Zero-shot routing of utterances to component models.
"""


from typing import Tuple

from loguru import logger

from ..dsp import Waveform, lps, stft
from ..quality import QualityNet, predict_quality
from ..selection import Strategy, qe_distances, qs_distances
from .ensemble import ComponentEnsemble
from .model import EnhancementError, enhance_with_model
from .schemas import EnhanceDiagnostics


def route(
    noisy: Waveform, ensemble: ComponentEnsemble, qnet: QualityNet
) -> EnhanceDiagnostics:
    """
    Picks the component model for an utterance.

    Args:
        noisy: The noisy utterance.
        ensemble: The ensemble.
        qnet: The quality predictor.

    Returns:
        The routing decision, with the score, embedding and distances it
        was based on.

    """
    spec = ensemble.cluster_spec
    result = predict_quality(
        qnet, lps(stft(noisy, qnet.checkpoint.features.stft))
    )
    if spec.strategy == Strategy.QS:
        distances = qs_distances(result.utterance_score, spec)
        embedding = None
    else:
        distances = qe_distances(result.utterance_embedding, spec)
        embedding = result.utterance_embedding.tolist()

    # Ties go to the lower index.
    chosen = int(distances.argmin())
    return EnhanceDiagnostics(
        strategy=spec.strategy,
        chosen=chosen,
        score=result.utterance_score,
        distances=distances.tolist(),
        embedding=embedding,
    )


def enhance(
    noisy: Waveform,
    ensemble: ComponentEnsemble,
    qnet: QualityNet,
    strategy: Strategy,
) -> Tuple[Waveform, int, EnhanceDiagnostics]:
    """
    Enhances an utterance with the component model it is routed to.

    Args:
        noisy: The noisy utterance.
        ensemble: The ensemble.
        qnet: The quality predictor.
        strategy: The routing strategy. Must match the ensemble.

    Raises:
        `EnhancementError` if the strategy doesn't match the ensemble.

    Returns:
        The enhanced utterance, the index of the model that was used, and
        the routing diagnostics.

    """
    if strategy != ensemble.strategy:
        raise EnhancementError(
            f"Cannot route with {strategy.value.upper()} using a "
            f"{ensemble.strategy.value.upper()} ensemble."
        )
    diagnostics = route(noisy, ensemble, qnet)
    enhanced = enhance_with_model(noisy, ensemble.models[diagnostics.chosen])
    logger.debug(
        "Routed to component {} (distances {}).",
        diagnostics.chosen,
        diagnostics.distances,
    )
    return enhanced, diagnostics.chosen, diagnostics
