"""
Synthesis of the desk corpus and handling of utterance manifests.
"""


from .generators import generate_clean, generate_noise, pseudo_speech
from .manifest import (
    ManifestError,
    MissingAudioError,
    filter_split,
    load_manifest,
    write_manifest,
)
from .mixing import MixingError, measured_snr, mix_at_snr, residual
from .schemas import (
    CorpusConfig,
    NoiseType,
    NoiseTypeSets,
    Split,
    UtteranceRecord,
)
from .synthesis import (
    MANIFEST_NAME,
    condition_record_id,
    snr_label,
    synthesize_desk_corpus,
    utterance_key_of,
)
