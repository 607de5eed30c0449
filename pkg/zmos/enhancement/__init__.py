"""
LPS-domain enhancement models, the component ensemble, and zero-shot
routed enhancement.
"""


from .enhance import enhance, route
from .ensemble import (
    ComponentEnsemble,
    load_routing_qnet,
    resolve_ensemble_dir,
)
from .features import stack_context
from .model import (
    SE_KIND,
    EnhancementError,
    SeModel,
    enhance_with_model,
    se_graph,
)
from .schemas import (
    ConvBlock,
    EnhanceDiagnostics,
    EnsembleManifest,
    SeModelSpec,
    SePreset,
    SeTrainingConfig,
)
from .training import train_baseline, train_component_bank, train_se_model
