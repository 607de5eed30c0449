"""
The experiment stages. Each one reads the artifacts of earlier stages and
writes its own under `<root>/<stage>/`.
"""


import functools
import math
import shutil
from pathlib import Path
from typing import Callable, Dict, List

import pandas as pd
import torch
from loguru import logger
from pydantic.dataclasses import dataclass

from ..corpus import (
    MANIFEST_NAME,
    Split,
    UtteranceRecord,
    condition_record_id,
    filter_split,
    load_manifest,
    synthesize_desk_corpus,
    utterance_key_of,
)
from ..dsp import WavSubtype, Waveform, load_waveform, save_waveform
from ..enhancement import (
    ComponentEnsemble,
    SeModel,
    enhance,
    enhance_with_model,
    train_baseline,
    train_component_bank,
)
from ..evaluation import (
    NOISY_SYSTEM,
    MetricReport,
    evaluate_corpus,
    export_spectrogram,
    format_metric_tables,
    noisy_system,
)
from ..hashing import sha256_file
from ..nn import save_checkpoint
from ..parallel import JobRunner
from ..quality import QualityNet, train_quality_net
from ..selection import (
    Strategy,
    build_cluster_spec,
    load_cluster_spec,
    save_cluster_spec,
)
from ..type_helpers import ArbitraryTypesConfig
from .experiment import ensure_writable_root
from .markers import check_prerequisites, stage_dir, staleness, write_marker
from .schemas import ExperimentConfig, Stage

BASELINE_SYSTEM = "Baseline"
QNET_FILE = "qnet.ckpt"
BASELINE_FILE = "baseline.ckpt"
ROUTING_FILE = "routing.csv"
REPORT_FILE = "report.csv"
SCORES_FILE = "scores.csv"
FAILURES_FILE = "failures.csv"
ROUTING_COLUMNS = (
    "record_id",
    "noise_type",
    "snr_db",
    "system",
    "chosen",
    "score",
    "distances",
)


def zmos_system(strategy: Strategy) -> str:
    """
    Args:
        strategy: A routing strategy.

    Returns:
        The name of the ZMOS system that uses it, such as "ZMOS-QS".

    """
    return f"ZMOS-{strategy.value.upper()}"


def set_torch_threads(num_threads: int) -> None:
    torch.set_num_threads(num_threads)


@dataclass(frozen=True, config=ArbitraryTypesConfig)
class StageContext:
    """
    Everything a stage needs to run.

    Attributes:
        config: The experiment configuration.
        root: The experiment root.
        runner: Runs independent jobs.

    """

    config: ExperimentConfig
    root: Path
    runner: JobRunner

    @property
    def manifest_path(self) -> Path:
        return stage_dir(self.root, Stage.SYNTH) / MANIFEST_NAME

    @property
    def qnet_path(self) -> Path:
        return stage_dir(self.root, Stage.TRAIN_QNET) / QNET_FILE

    def cluster_spec_path(self, strategy: Strategy) -> Path:
        return stage_dir(self.root, Stage.CLUSTER) / f"{strategy.value}.json"

    def ensemble_dir(self, strategy: Strategy) -> Path:
        return stage_dir(self.root, Stage.TRAIN_SE) / strategy.value

    @property
    def baseline_path(self) -> Path:
        return stage_dir(self.root, Stage.TRAIN_SE) / BASELINE_FILE

    def system_dir(self, system: str) -> Path:
        return stage_dir(self.root, Stage.ENHANCE) / system

    @property
    def systems(self) -> List[str]:
        """
        Every evaluated system, in report order.
        """
        return [NOISY_SYSTEM, BASELINE_SYSTEM] + [
            zmos_system(s) for s in self.config.zmos.strategies
        ]

    def records(self, split: Split) -> List[UtteranceRecord]:
        return filter_split(load_manifest(self.manifest_path), split)


def _synth(context: StageContext) -> None:
    synthesize_desk_corpus(
        context.config.corpus,
        stage_dir(context.root, Stage.SYNTH),
        runner=context.runner,
    )


def _train_qnet(context: StageContext) -> None:
    output_dir = stage_dir(context.root, Stage.TRAIN_QNET)
    checkpoint = train_quality_net(
        context.records(Split.TRAIN),
        context.config.qnet,
        context.config.stft,
        log_path=output_dir / "training_log.csv",
        runner=context.runner,
    )
    save_checkpoint(checkpoint, context.qnet_path)


def _cluster(context: StageContext) -> None:
    config = context.config
    records = context.records(Split.TRAIN)
    qnet = QualityNet.load(context.qnet_path)
    qnet_sha256 = sha256_file(context.qnet_path)
    for strategy in config.zmos.strategies:
        cluster_spec = build_cluster_spec(
            records,
            qnet,
            strategy,
            config.zmos.num_clusters,
            config.zmos.seed,
            stft_config=config.stft,
            kmeans_config=config.zmos.kmeans,
            qnet_sha256=qnet_sha256,
        )
        for cluster in range(cluster_spec.num_clusters):
            logger.info(
                "{} cluster {} has {} utterances.",
                strategy.value.upper(),
                cluster,
                len(cluster_spec.members(cluster)),
            )
        save_cluster_spec(cluster_spec, context.cluster_spec_path(strategy))


def _train_se(context: StageContext) -> None:
    config = context.config
    records = context.records(Split.TRAIN)
    spec = config.se.model_spec
    baseline = train_baseline(
        records,
        spec,
        config.se.training,
        config.stft,
        runner=context.runner,
    )
    save_checkpoint(baseline, context.baseline_path)

    for strategy in config.zmos.strategies:
        cluster_spec = load_cluster_spec(context.cluster_spec_path(strategy))
        bank = train_component_bank(
            records,
            cluster_spec,
            spec,
            config.se.training,
            config.stft,
            runner=context.runner,
        )
        ensemble = ComponentEnsemble(cluster_spec, bank, baseline)
        ensemble.save(
            context.ensemble_dir(strategy), qnet_path=context.qnet_path
        )


@functools.cache
def _load_qnet(path: Path) -> QualityNet:
    return QualityNet.load(path)


@functools.cache
def _load_se_model(path: Path) -> SeModel:
    return SeModel.load(path)


@functools.cache
def _load_ensemble(directory: Path) -> ComponentEnsemble:
    return ComponentEnsemble.load(directory)


def _enhance_record(
    record: UtteranceRecord,
    *,
    qnet_path: Path,
    baseline_path: Path,
    ensemble_dirs: Dict[Strategy, Path],
    output_dir: Path,
) -> List[Dict]:
    """
    Enhances one test record with the baseline and every ensemble.

    Args:
        record: The test record.
        qnet_path: The quality predictor checkpoint.
        baseline_path: The baseline checkpoint.
        ensemble_dirs: The ensemble directory of each strategy.
        output_dir: The enhance stage directory.

    Returns:
        One routing row for each ensemble.

    """
    noisy = load_waveform(record.noisy_path)

    def save(system: str, enhanced: Waveform) -> None:
        save_waveform(
            enhanced,
            output_dir / system / f"{record.id}.wav",
            subtype=WavSubtype.FLOAT,
        )

    save(
        BASELINE_SYSTEM,
        enhance_with_model(noisy, _load_se_model(baseline_path)),
    )

    routing = []
    for strategy, directory in ensemble_dirs.items():
        enhanced, chosen, diagnostics = enhance(
            noisy, _load_ensemble(directory), _load_qnet(qnet_path), strategy
        )
        save(zmos_system(strategy), enhanced)
        routing.append(
            dict(
                record_id=record.id,
                noise_type=record.noise_type,
                snr_db=record.snr_db,
                system=zmos_system(strategy),
                chosen=chosen,
                score=diagnostics.score,
                distances=" ".join(f"{d:.6f}" for d in diagnostics.distances),
            )
        )
    return routing


def _enhance(context: StageContext) -> None:
    # Checkpoints may have been retrained since they were cached.
    for loader in (_load_qnet, _load_se_model, _load_ensemble):
        loader.cache_clear()

    output_dir = stage_dir(context.root, Stage.ENHANCE)
    for system in context.systems[1:]:
        context.system_dir(system).mkdir(parents=True, exist_ok=True)

    records = context.records(Split.TEST)
    logger.info("Enhancing {} test records.", len(records))
    enhance_record = functools.partial(
        _enhance_record,
        qnet_path=context.qnet_path,
        baseline_path=context.baseline_path,
        ensemble_dirs={
            s: context.ensemble_dir(s) for s in context.config.zmos.strategies
        },
        output_dir=output_dir,
    )
    rows = [
        row
        for record_rows in context.runner.map(enhance_record, records)
        for row in record_rows
    ]
    pd.DataFrame(rows, columns=list(ROUTING_COLUMNS)).to_csv(
        output_dir / ROUTING_FILE,
        index=False,
        float_format="%.6f",
        lineterminator="\n",
    )


def load_system_output(
    record: UtteranceRecord, *, directory: Path
) -> Waveform:
    """
    Args:
        record: A test record.
        directory: The output directory of a system.

    Returns:
        The output of the system for that record.

    """
    return load_waveform(directory / f"{record.id}.wav")


def _evaluate(context: StageContext) -> None:
    output_dir = stage_dir(context.root, Stage.EVALUATE)
    systems: Dict[str, Callable[[UtteranceRecord], Waveform]] = {
        NOISY_SYSTEM: noisy_system
    }
    for system in context.systems[1:]:
        systems[system] = functools.partial(
            load_system_output, directory=context.system_dir(system)
        )

    report = evaluate_corpus(
        context.records(Split.TEST),
        systems,
        [n.value for n in context.config.corpus.noise_types.seen],
        runner=context.runner,
    )
    report.write_csv(output_dir / REPORT_FILE)
    pd.DataFrame([s.dict() for s in report.scores]).to_csv(
        output_dir / SCORES_FILE,
        index=False,
        float_format="%.6f",
        lineterminator="\n",
    )
    pd.DataFrame(
        [f.dict() for f in report.failures],
        columns=["system", "record_id", "error"],
    ).to_csv(output_dir / FAILURES_FILE, index=False, lineterminator="\n")


def read_report(path: Path) -> MetricReport:
    """
    Args:
        path: A report CSV written by the evaluate stage.

    Returns:
        The report table. Per-utterance scores are not included.

    """
    table = pd.read_csv(path, dtype={"snr_db": str, "seen": str})
    return MetricReport(table=table, scores=[], failures=[])


def routing_summary(routing: pd.DataFrame) -> pd.DataFrame:
    """
    Counts how often each cluster was chosen.

    Args:
        routing: The routing log of the enhance stage.

    Returns:
        The number of utterances per (system, noise type, SNR, cluster).

    """
    return (
        routing.groupby(
            ["system", "noise_type", "snr_db", "chosen"], sort=False
        )
        .size()
        .rename("n_utts")
        .reset_index()
    )


def separation_rate(
    routing: pd.DataFrame,
    seen_noise_types: List[str],
    high_snr_db: float,
    low_snr_db: float,
) -> float:
    """
    Measures how well QS routing tells apart the two extreme SNRs: the
    fraction of (utterance, seen noise type) pairs whose high-SNR and
    low-SNR versions are sent to different clusters.

    Args:
        routing: The routing log of the enhance stage.
        seen_noise_types: The seen noise types.
        high_snr_db: The highest test SNR.
        low_snr_db: The lowest test SNR.

    Returns:
        The separation rate, or NaN if there are no such pairs.

    """
    rows = routing[
        (routing["system"] == zmos_system(Strategy.QS))
        & routing["noise_type"].isin(seen_noise_types)
    ]
    chosen: Dict[tuple, Dict[float, int]] = {}
    for row in rows.itertuples():
        key = (
            utterance_key_of(row.record_id, row.noise_type, row.snr_db),
            row.noise_type,
        )
        chosen.setdefault(key, {})[row.snr_db] = row.chosen

    pairs = [
        by_snr[high_snr_db] != by_snr[low_snr_db]
        for by_snr in chosen.values()
        if high_snr_db in by_snr and low_snr_db in by_snr
    ]
    if not pairs:
        return math.nan
    return sum(pairs) / len(pairs)


def _export_spectrograms(context: StageContext, output_dir: Path) -> None:
    """
    Exports spectrograms of one test record as processed by every system.

    Args:
        context: The stage context.
        output_dir: Where to write them.

    """
    selection = context.config.evaluation
    record_id = condition_record_id(
        selection.spectrogram_utterance,
        selection.spectrogram_noise_type.value,
        selection.spectrogram_snr_db,
    )
    records = {r.id: r for r in context.records(Split.TEST)}
    if record_id not in records:
        logger.warning(
            "Test record {} does not exist, not exporting spectrograms.",
            record_id,
        )
        return
    record = records[record_id]

    signals = {
        "clean": load_waveform(record.clean_path),
        "noisy": load_waveform(record.noisy_path),
    }
    for system in context.systems[1:]:
        signals[system.lower()] = load_system_output(
            record, directory=context.system_dir(system)
        )
    for name, waveform in signals.items():
        export_spectrogram(waveform, output_dir / name, context.config.stft)
    logger.info("Exported spectrograms of {}.", record_id)


def _report(context: StageContext) -> None:
    config = context.config
    output_dir = stage_dir(context.root, Stage.REPORT)
    evaluate_dir = stage_dir(context.root, Stage.EVALUATE)

    report = read_report(evaluate_dir / REPORT_FILE)
    report.write_csv(output_dir / REPORT_FILE)
    failures = pd.read_csv(evaluate_dir / FAILURES_FILE)

    routing = pd.read_csv(
        stage_dir(context.root, Stage.ENHANCE) / ROUTING_FILE
    )
    routing_summary(routing).to_csv(
        output_dir / "routing_summary.csv", index=False, lineterminator="\n"
    )

    lines = [format_metric_tables(report, context.systems)]
    if not failures.empty:
        lines.append(
            f"{len(failures)} system outputs failed and are excluded from "
            f"the means; see {FAILURES_FILE} of the evaluate stage.\n"
        )
    if Strategy.QS in config.zmos.strategies:
        snrs = config.corpus.test_snrs_db
        rate = separation_rate(
            routing,
            [n.value for n in config.corpus.noise_types.seen],
            max(snrs),
            min(snrs),
        )
        separated = "n/a" if math.isnan(rate) else f"{rate:.1%}"
        lines.append(
            f"QS routing separates {max(snrs):+g} dB from {min(snrs):+g} dB "
            f"seen-noise utterances in {separated} of cases.\n"
        )
    (output_dir / "report.txt").write_text("\n".join(lines), encoding="utf8")

    _export_spectrograms(context, output_dir / "spectrograms")


_STAGE_FUNCTIONS: Dict[Stage, Callable[[StageContext], None]] = {
    Stage.SYNTH: _synth,
    Stage.TRAIN_QNET: _train_qnet,
    Stage.CLUSTER: _cluster,
    Stage.TRAIN_SE: _train_se,
    Stage.ENHANCE: _enhance,
    Stage.EVALUATE: _evaluate,
    Stage.REPORT: _report,
}


def run_stage(
    stage: Stage, config: ExperimentConfig, *, force: bool = False
) -> bool:
    """
    Runs a stage, unless its output is already current.

    Args:
        stage: The stage to run.
        config: The experiment configuration.
        force: Run even if the output is current.

    Raises:
        `ConfigError` if the experiment root is not writable.
        `MissingPrerequisiteError` if a prerequisite hasn't completed.
        `StaleInputError` if a prerequisite's output is out of date.

    Returns:
        True if the stage ran, false if it was skipped.

    """
    root = ensure_writable_root(config)
    inputs = check_prerequisites(root, stage, config)
    reason = staleness(root, stage, config)
    if reason is None and not force:
        logger.info("Stage '{}' is up to date.", stage.value)
        return False
    logger.info(
        "Running stage '{}' because {}.",
        stage.value,
        reason or "it was forced",
    )

    directory = stage_dir(root, stage)
    if directory.exists():
        shutil.rmtree(directory)
    directory.mkdir(parents=True)

    runtime = config.runtime
    set_torch_threads(runtime.torch_threads)
    runner = JobRunner(
        runtime.jobs,
        initializer=functools.partial(
            set_torch_threads, runtime.torch_threads
        ),
    )
    _STAGE_FUNCTIONS[stage](
        StageContext(config=config, root=root, runner=runner)
    )
    write_marker(root, stage, config, inputs)
    logger.info("Stage '{}' complete.", stage.value)
    return True


def run_all(config: ExperimentConfig, *, force: bool = False) -> None:
    """
    Runs every stage in order, skipping those whose output is current.

    Args:
        config: The experiment configuration.
        force: Run every stage even if its output is current.

    """
    for stage in Stage:
        run_stage(stage, config, force=force)
