"""
Scoring a test corpus with several systems, and aggregating the results
into report tables.
"""


import functools
from pathlib import Path
from typing import Callable, Collection, Dict, List, Mapping, Tuple

import pandas as pd
from loguru import logger
from pydantic.dataclasses import dataclass

from ..corpus import UtteranceRecord
from ..dsp import Waveform, load_waveform
from ..errors import ZmosError
from ..parallel import JobRunner
from ..schemas import ZmosModel
from ..type_helpers import ArbitraryTypesConfig
from .metrics import quality_target, segmental_snr, stoi

NOISY_SYSTEM = "Noisy"
AVERAGE_LABEL = "ave"
"""
Value of `snr_db` in rows that average over all SNRs.
"""
METRIC_COLUMNS = ("stoi", "segsnr_db", "quality_target")
REPORT_COLUMNS = (
    "system",
    "noise_type",
    "seen",
    "snr_db",
    *METRIC_COLUMNS,
    "n_utts",
)

SystemFunction = Callable[[UtteranceRecord], Waveform]
"""
Produces a system's output for a test record.
"""


class UtteranceScore(ZmosModel):
    """
    Metrics for one system on one record.

    Attributes:
        system: The system name.
        record_id: The record ID.
        noise_type: The noise type of the record.
        seen: Whether the noise type was seen in training.
        snr_db: The input SNR of the record.
        stoi: STOI of the output.
        segsnr_db: Segmental SNR of the output.
        quality_target: Quality target of the output.

    """

    system: str
    record_id: str
    noise_type: str
    seen: bool
    snr_db: float
    stoi: float
    segsnr_db: float
    quality_target: float


class FailedScore(ZmosModel):
    """
    A system output that could not be produced or scored.

    Attributes:
        system: The system name.
        record_id: The record ID.
        error: Description of what went wrong.

    """

    system: str
    record_id: str
    error: str


@dataclass(frozen=True, config=ArbitraryTypesConfig)
class MetricReport:
    """
    Per-condition means of every metric.

    Attributes:
        table: One row per (system, noise type, SNR) cell, plus one "ave"
            row per (system, noise type). Columns are `REPORT_COLUMNS`.
        scores: The per-utterance scores the table was computed from.
        failures: Outputs that were excluded from the means.

    """

    table: pd.DataFrame
    scores: List[UtteranceScore]
    failures: List[FailedScore]

    def cells(self) -> pd.DataFrame:
        """
        Returns:
            Only the per-SNR rows of the table.

        """
        return self.table[self.table["snr_db"] != AVERAGE_LABEL]

    def averages(self) -> pd.DataFrame:
        """
        Returns:
            Only the "ave" rows of the table.

        """
        return self.table[self.table["snr_db"] == AVERAGE_LABEL]

    def write_csv(self, path: Path) -> None:
        """
        Writes the table as CSV. Output is deterministic for a given
        report.

        Args:
            path: The file to write.

        """
        path.parent.mkdir(parents=True, exist_ok=True)
        self.table.to_csv(
            path, index=False, float_format="%.6f", lineterminator="\n"
        )


def _score_record(
    record: UtteranceRecord,
    *,
    systems: Mapping[str, SystemFunction],
    seen_noise_types: frozenset[str],
) -> Tuple[List[UtteranceScore], List[FailedScore]]:
    """
    Scores every system on one record.

    Args:
        record: The record.
        systems: The systems to score.
        seen_noise_types: Names of the noise types seen in training.

    Returns:
        The scores, and any failures.

    """
    clean = load_waveform(record.clean_path)
    scores = []
    failures = []
    for name, system in systems.items():
        try:
            output = system(record)
            scores.append(
                UtteranceScore(
                    system=name,
                    record_id=record.id,
                    noise_type=record.noise_type,
                    seen=record.noise_type in seen_noise_types,
                    snr_db=record.snr_db,
                    stoi=stoi(clean, output),
                    segsnr_db=segmental_snr(clean, output),
                    quality_target=quality_target(clean, output),
                )
            )
        except (ZmosError, ValueError, RuntimeError) as err:
            logger.warning("{} failed on {}: {}", name, record.id, err)
            failures.append(
                FailedScore(system=name, record_id=record.id, error=str(err))
            )
    return scores, failures


def noisy_system(record: UtteranceRecord) -> Waveform:
    """
    The "Noisy" system, which just returns the unprocessed input.

    Args:
        record: The test record.

    Returns:
        The noisy signal.

    """
    return load_waveform(record.noisy_path)


def aggregate(
    scores: List[UtteranceScore], system_order: List[str]
) -> pd.DataFrame:
    """
    Averages scores per condition, then averages the per-SNR cells of each
    (system, noise type) into an "ave" row.

    Args:
        scores: The per-utterance scores.
        system_order: Order to list systems in.

    Returns:
        The report table. Rows are ordered by system, then seen noise
        types before unseen ones, then descending SNR, with "ave" last.

    """
    if not scores:
        return pd.DataFrame(columns=list(REPORT_COLUMNS))

    frame = pd.DataFrame([s.dict() for s in scores])
    noise_order = list(
        dict.fromkeys(
            frame.sort_values("seen", ascending=False, kind="stable")[
                "noise_type"
            ]
        )
    )
    keys = ["system", "noise_type", "seen", "snr_db"]
    cells = (
        frame.groupby(keys, sort=False)
        .agg(
            **{metric: (metric, "mean") for metric in METRIC_COLUMNS},
            n_utts=("record_id", "count"),
        )
        .reset_index()
    )
    cells["system_rank"] = cells["system"].map(system_order.index)
    cells["noise_rank"] = cells["noise_type"].map(noise_order.index)
    cells = cells.sort_values(
        ["system_rank", "noise_rank", "snr_db"],
        ascending=[True, True, False],
        kind="stable",
    )

    rows: List[Dict] = []
    for _, group in cells.groupby(["system_rank", "noise_rank"], sort=True):
        for _, cell in group.iterrows():
            rows.append(
                dict(
                    cell[list(REPORT_COLUMNS)],
                    snr_db=f"{cell['snr_db']:g}",
                )
            )
        first = group.iloc[0]
        rows.append(
            dict(
                system=first["system"],
                noise_type=first["noise_type"],
                seen=first["seen"],
                snr_db=AVERAGE_LABEL,
                **{
                    metric: group[metric].mean()
                    for metric in METRIC_COLUMNS
                },
                n_utts=int(group["n_utts"].sum()),
            )
        )

    table = pd.DataFrame(rows, columns=list(REPORT_COLUMNS))
    table["seen"] = table["seen"].map(
        lambda seen: "seen" if seen else "unseen"
    )
    table["n_utts"] = table["n_utts"].astype(int)
    return table


def evaluate_corpus(
    records: List[UtteranceRecord],
    systems: Mapping[str, SystemFunction],
    seen_noise_types: Collection[str],
    *,
    runner: JobRunner | None = None,
) -> MetricReport:
    """
    Scores every system on every record, and aggregates by condition.

    Args:
        records: The test records.
        systems: The systems to evaluate, by name, in report order. Must
            include "Noisy". When running in parallel, the functions must
            be picklable.
        seen_noise_types: Names of the noise types seen in training.
        runner: Used to score records in parallel.

    Raises:
        `ZmosError` if "Noisy" is not one of the systems.

    Returns:
        The report.

    """
    if NOISY_SYSTEM not in systems:
        raise ZmosError(f"Systems must include '{NOISY_SYSTEM}'.")
    if runner is None:
        runner = JobRunner(1)

    logger.info(
        "Scoring {} systems on {} records.", len(systems), len(records)
    )
    score_record = functools.partial(
        _score_record,
        systems=dict(systems),
        seen_noise_types=frozenset(seen_noise_types),
    )
    scores = []
    failures = []
    for record_scores, record_failures in runner.map(score_record, records):
        scores.extend(record_scores)
        failures.extend(record_failures)

    if failures:
        logger.warning("{} system outputs failed.", len(failures))
    return MetricReport(
        table=aggregate(scores, list(systems)),
        scores=scores,
        failures=failures,
    )
