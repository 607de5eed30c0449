"""
Synthesis of the desk corpus: pseudo-speech utterances mixed with the
noise roster at exact SNRs.
"""


import functools
from pathlib import Path
from typing import List

import numpy as np
from loguru import logger

from ..dsp import WavSubtype, Waveform, load_waveform, save_waveform
from ..hashing import derive_seed
from ..parallel import JobRunner
from ..schemas import ZmosModel
from .generators import generate_clean, generate_noise
from .manifest import write_manifest
from .mixing import mix_at_snr
from .schemas import CorpusConfig, NoiseType, Split, UtteranceRecord

MANIFEST_NAME = "manifest.jsonl"
"""
Name of the manifest file within a corpus directory.
"""
_PEAK_LIMIT = 0.99
"""
Mixtures whose peak exceeds this are scaled down, together with their
clean reference.
"""


class RecordJob(ZmosModel):
    """
    Everything needed to synthesize one record independently.

    Attributes:
        record_id: The ID of the record.
        utterance_key: Identifies the clean utterance. Test records that
            share a key share the same clean speech.
        split: The split of the record.
        noise_type: The noise to mix in.
        snr_db: The SNR to mix at.
        noise_path: The noise recording to crop from.
        output_dir: The corpus directory.
        seed: The corpus seed.
        num_samples: Utterance length.
        sample_rate: The sample rate.

    """

    record_id: str
    utterance_key: str
    split: Split
    noise_type: NoiseType
    snr_db: float
    noise_path: Path
    output_dir: Path
    seed: int
    num_samples: int
    sample_rate: int


def snr_label(snr_db: float) -> str:
    """
    Args:
        snr_db: An SNR.

    Returns:
        A compact, signed label for the SNR, such as "+15dB".

    """
    return f"{snr_db:+g}dB"


def condition_record_id(utterance: int, noise_type: str, snr_db: float) -> str:
    """
    Args:
        utterance: Index of the clean test utterance.
        noise_type: The noise type.
        snr_db: The SNR.

    Returns:
        The ID of the test record for that condition.

    """
    return f"test-{utterance:04d}-{noise_type}-{snr_label(snr_db)}"


def utterance_key_of(record_id: str, noise_type: str, snr_db: float) -> str:
    """
    Args:
        record_id: The ID of a test record.
        noise_type: Its noise type.
        snr_db: Its SNR.

    Returns:
        The key of the clean utterance the record was mixed from.

    """
    return record_id.removesuffix(f"-{noise_type}-{snr_label(snr_db)}")


@functools.cache
def _load_noise(path: Path) -> Waveform:
    return load_waveform(path)


def _synthesize_record(job: RecordJob) -> UtteranceRecord:
    """
    Synthesizes and saves one clean/noisy pair.

    Args:
        job: Describes the record.

    Returns:
        The record, with absolute paths.

    """
    clean_rng = np.random.default_rng(
        derive_seed(job.seed, "clean", job.utterance_key)
    )
    clean = generate_clean(clean_rng, job.num_samples, job.sample_rate)
    noisy, _ = mix_at_snr(
        clean,
        _load_noise(job.noise_path),
        job.snr_db,
        derive_seed(job.seed, "mix", job.record_id),
    )

    peak = float(np.max(np.abs(noisy.samples)))
    if peak > _PEAK_LIMIT:
        scale = _PEAK_LIMIT / peak
        logger.debug(
            "Scaling {} by {} to avoid clipping.", job.record_id, scale
        )
        clean = Waveform(
            samples=clean.samples * scale, sample_rate=clean.sample_rate
        )
        noisy = Waveform(
            samples=noisy.samples * scale, sample_rate=noisy.sample_rate
        )

    clean_path = job.output_dir / "clean" / f"{job.record_id}.wav"
    noisy_path = job.output_dir / "noisy" / f"{job.record_id}.wav"
    save_waveform(clean, clean_path, subtype=WavSubtype.FLOAT)
    save_waveform(noisy, noisy_path, subtype=WavSubtype.FLOAT)

    return UtteranceRecord(
        id=job.record_id,
        clean_path=clean_path,
        noisy_path=noisy_path,
        noise_type=job.noise_type.value,
        snr_db=job.snr_db,
        split=job.split,
        duration_s=clean.duration_s,
    )


def plan_records(config: CorpusConfig, output_dir: Path) -> List[RecordJob]:
    """
    Decides the condition of every record. Each training utterance gets one
    seeded (noise, SNR) draw; each test utterance is expanded over every
    test noise type and SNR.

    Args:
        config: The corpus configuration.
        output_dir: The corpus directory.

    Returns:
        The jobs, in manifest order.

    """
    common = dict(
        output_dir=output_dir,
        seed=config.seed,
        num_samples=config.utterance_len,
        sample_rate=config.sample_rate,
    )

    def noise_path(noise_type: NoiseType) -> Path:
        return output_dir / "noises" / f"{noise_type.value}.wav"

    jobs = []
    train_pool = config.train_noise_types
    for index in range(config.n_train_utts):
        record_id = f"train-{index:05d}"
        rng = np.random.default_rng(
            derive_seed(config.seed, "condition", record_id)
        )
        noise_type = train_pool[int(rng.integers(len(train_pool)))]
        snr_db = config.train_snrs_db[
            int(rng.integers(len(config.train_snrs_db)))
        ]
        jobs.append(
            RecordJob(
                record_id=record_id,
                utterance_key=record_id,
                split=Split.TRAIN,
                noise_type=noise_type,
                snr_db=snr_db,
                noise_path=noise_path(noise_type),
                **common,
            )
        )

    for index in range(config.n_test_utts):
        for noise_type in config.noise_types.all_types:
            for snr_db in config.test_snrs_db:
                record_id = condition_record_id(
                    index, noise_type.value, snr_db
                )
                jobs.append(
                    RecordJob(
                        record_id=record_id,
                        utterance_key=utterance_key_of(
                            record_id, noise_type.value, snr_db
                        ),
                        split=Split.TEST,
                        noise_type=noise_type,
                        snr_db=snr_db,
                        noise_path=noise_path(noise_type),
                        **common,
                    )
                )

    return jobs


def synthesize_noises(config: CorpusConfig, output_dir: Path) -> List[Path]:
    """
    Generates one long recording per noise type.

    Args:
        config: The corpus configuration.
        output_dir: The corpus directory.

    Returns:
        The paths of the saved recordings.

    """
    paths = []
    for noise_type in config.all_noise_types:
        rng = np.random.default_rng(
            derive_seed(config.seed, "noise", noise_type.value)
        )
        noise = generate_noise(
            noise_type, rng, config.noise_len, config.sample_rate
        )
        path = output_dir / "noises" / f"{noise_type.value}.wav"
        save_waveform(noise, path, subtype=WavSubtype.FLOAT)
        logger.debug("Generated {} noise at {}.", noise_type.value, path)
        paths.append(path)
    return paths


def synthesize_desk_corpus(
    config: CorpusConfig,
    output_dir: Path,
    *,
    runner: JobRunner | None = None,
) -> Path:
    """
    Synthesizes the complete desk corpus. The output is a pure function of
    `config`.

    Args:
        config: The corpus configuration.
        output_dir: Directory to write the corpus to.
        runner: Used to synthesize records in parallel. Defaults to
            sequential synthesis.

    Returns:
        The path to the manifest.

    """
    if runner is None:
        runner = JobRunner(1)
    for sub_dir in ("clean", "noisy", "noises"):
        (output_dir / sub_dir).mkdir(parents=True, exist_ok=True)

    synthesize_noises(config, output_dir)
    jobs = plan_records(config, output_dir)
    logger.info("Synthesizing {} records into {}.", len(jobs), output_dir)
    records = runner.map(_synthesize_record, jobs)

    manifest_path = output_dir / MANIFEST_NAME
    write_manifest(records, manifest_path)
    logger.info("Wrote corpus manifest {}.", manifest_path)
    return manifest_path
