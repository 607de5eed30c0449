"""
Objective evaluation: metrics, corpus-level reports, and spectrograms.
"""


from .metrics import (
    MetricError,
    display_quality,
    quality_target,
    segmental_snr,
    stoi,
)
from .report import (
    AVERAGE_LABEL,
    NOISY_SYSTEM,
    FailedScore,
    MetricReport,
    UtteranceScore,
    aggregate,
    evaluate_corpus,
    noisy_system,
)
from .spectrogram import export_spectrogram, lps_to_image
from .tables import format_metric_tables
