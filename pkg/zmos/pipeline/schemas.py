"""
Schemas for the experiment configuration and stage bookkeeping.
"""


import enum
import json
from pathlib import Path
from typing import Any, Dict, List, Optional

from pydantic import Field, validator
from pydantic.types import conint

from ..corpus import CorpusConfig, NoiseType
from ..dsp import StftConfig
from ..enhancement import SeModelSpec, SePreset, SeTrainingConfig
from ..quality import QualityNetConfig
from ..schemas import ZmosModel
from ..selection import KMeansConfig, Strategy


@enum.unique
class Stage(str, enum.Enum):
    """
    Stages of an experiment, in the order they run.
    """

    SYNTH = "synth"
    TRAIN_QNET = "train-qnet"
    CLUSTER = "cluster"
    TRAIN_SE = "train-se"
    ENHANCE = "enhance"
    EVALUATE = "evaluate"
    REPORT = "report"


class PathsConfig(ZmosModel):
    """
    Attributes:
        root: The experiment directory. Relative paths are resolved against
            the directory of the experiment file.

    """

    root: Path = Path("experiment")


class SeConfig(ZmosModel):
    """
    Configuration of the enhancement models.

    Attributes:
        preset: Named architecture, used unless `model` is given.
        model: Explicit architecture.
        training: Training parameters shared by the baseline and every
            component model.

    """

    preset: SePreset = SePreset.DESK
    model: Optional[SeModelSpec] = None
    training: SeTrainingConfig = Field(default_factory=SeTrainingConfig)

    @property
    def model_spec(self) -> SeModelSpec:
        """
        The architecture to train.
        """
        if self.model is not None:
            return self.model
        return SeModelSpec.from_preset(self.preset)


class SelectionConfig(ZmosModel):
    """
    Configuration of the clustering and routing.

    Attributes:
        strategies: The strategies to build ensembles for.
        num_clusters: The number of clusters, and of component models.
        seed: Seed for clustering.
        kmeans: Parameters of QE clustering.

    """

    strategies: List[Strategy] = Field(
        default_factory=lambda: [Strategy.QS, Strategy.QE], min_items=1
    )
    num_clusters: conint(ge=1) = 4
    seed: int = 0
    kmeans: KMeansConfig = Field(default_factory=KMeansConfig)

    @validator("strategies")
    def strategies_unique(cls, strategies: List[Strategy]) -> List[Strategy]:
        """
        Ensures that no strategy is listed twice.

        Args:
            strategies: The strategies.

        Returns:
            The same strategies.

        """
        unique = set(strategies)
        assert len(unique) == len(strategies), "Strategies must be unique."
        return strategies


class EvaluationConfig(ZmosModel):
    """
    Configuration of the report.

    Attributes:
        spectrogram_noise_type: Noise type of the test record whose
            spectrograms are exported.
        spectrogram_snr_db: Input SNR of that record.
        spectrogram_utterance: Index of the test utterance to use.

    """

    spectrogram_noise_type: NoiseType = NoiseType.CAR
    spectrogram_snr_db: float = 0.0
    spectrogram_utterance: conint(ge=0) = 0


class RuntimeConfig(ZmosModel):
    """
    Execution settings. These never change results.

    Attributes:
        jobs: Maximum number of parallel worker processes.
        torch_threads: Intra-op threads used by torch in every process.

    """

    jobs: conint(ge=1) = 1
    torch_threads: conint(ge=1) = 1


class ExperimentConfig(ZmosModel):
    """
    Everything that determines the outcome of an experiment.
    """

    paths: PathsConfig = Field(default_factory=PathsConfig)
    stft: StftConfig = Field(default_factory=StftConfig)
    corpus: CorpusConfig = Field(default_factory=CorpusConfig)
    qnet: QualityNetConfig = Field(default_factory=QualityNetConfig)
    se: SeConfig = Field(default_factory=SeConfig)
    zmos: SelectionConfig = Field(default_factory=SelectionConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    runtime: RuntimeConfig = Field(default_factory=RuntimeConfig)

    def section_values(self, sections: List[str]) -> Dict[str, Any]:
        """
        Args:
            sections: Names of top-level sections.

        Returns:
            The JSON-compatible values of those sections.

        """
        return {
            name: json.loads(getattr(self, name).json())
            for name in sorted(sections)
        }


class StageMarker(ZmosModel):
    """
    Contents of `stage_complete.json`, written when a stage finishes.

    Attributes:
        stage: The stage.
        config_sha256: Hash of the configuration sections the stage
            depends on.
        inputs: Hash of the marker of every prerequisite stage.
        artifacts: Hash of every file the stage wrote, by path relative to
            the stage directory.

    """

    stage: Stage
    config_sha256: str
    inputs: Dict[Stage, str] = {}
    artifacts: Dict[str, str] = {}
