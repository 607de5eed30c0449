"""
The experiment pipeline: configuration, stages, and the command line.
"""


from .experiment import load_experiment_config
from .markers import MissingPrerequisiteError, StaleInputError
from .schemas import ExperimentConfig, Stage, StageMarker
from .stages import run_all, run_stage
