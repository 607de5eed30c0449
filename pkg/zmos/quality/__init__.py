"""
Non-intrusive quality prediction: frame scores, utterance scores and
quality embeddings from noisy LPS.
"""


from .loss import quality_net_loss, utterance_loss
from .model import (
    QUALITY_NET_KIND,
    QualityNet,
    QualityNetError,
    extract_embedding,
    predict_quality,
    quality_net_graph,
)
from .schemas import AlphaConfig, AlphaForm, QualityNetConfig, QualityResult
from .training import train_quality_net
