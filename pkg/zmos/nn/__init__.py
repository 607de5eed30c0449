"""
Minimal differentiable network core used by every model in the package.
"""


from .checkpoint import (
    CheckpointError,
    build_model,
    checkpoint_from_model,
    load_checkpoint,
    read_checkpoint_metadata,
    save_checkpoint,
)
from .graph import (
    DTYPE,
    ModelGraph,
    NonFiniteError,
    ShapeError,
    Tape,
    backward,
    forward,
)
from .optim import AdamState, adam_step, zero_gradients
from .schemas import (
    ActivationName,
    FeatureSpec,
    GraphSpec,
    LayerKind,
    LayerSpec,
    ModelCheckpoint,
    Normalization,
    NormStats,
    TrainingMetadata,
)
