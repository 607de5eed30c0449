"""
Plain-text tables of a metric report, laid out one block per noise type
with systems as rows and input SNRs as columns.
"""


from typing import Callable, List

import pandas as pd

from .metrics import display_quality
from .report import AVERAGE_LABEL, MetricReport

_METRICS = (
    (
        "quality_target",
        "Quality (surrogate PESQ-like scale, -0.5 + 5 x STOI)",
        display_quality,
        "{:.2f}",
    ),
    ("stoi", "STOI", lambda v: v, "{:.3f}"),
    ("segsnr_db", "Segmental SNR (dB)", lambda v: v, "{:.2f}"),
)


def _metric_block(
    table: pd.DataFrame,
    metric: str,
    transform: Callable[[pd.Series], pd.Series],
    number_format: str,
    system_order: List[str],
) -> List[str]:
    """
    Formats one metric for the rows of one noise type.

    Args:
        table: The report rows for a single noise type.
        metric: The metric column.
        transform: Applied to values before display.
        number_format: Format for values.
        system_order: The order of rows.

    Returns:
        The lines of the block.

    """
    snr_order = list(dict.fromkeys(table["snr_db"]))
    # Keep "ave" as the last column.
    snr_order = [s for s in snr_order if s != AVERAGE_LABEL] + [AVERAGE_LABEL]
    pivot = table.pivot(index="system", columns="snr_db", values=metric)
    pivot = pivot.reindex(
        index=[s for s in system_order if s in pivot.index],
        columns=snr_order,
    )
    pivot = transform(pivot.astype(float))
    pivot.columns = ["Ave" if c == AVERAGE_LABEL else c for c in snr_order]
    formatted = pivot.map(
        lambda v: "-" if pd.isna(v) else number_format.format(v)
    )
    return formatted.to_string().splitlines()


def format_metric_tables(report: MetricReport, system_order: List[str]) -> str:
    """
    Renders every metric as text tables, seen noise types first.

    Args:
        report: The report to render.
        system_order: The order of rows within each block.

    Returns:
        The rendered tables.

    """
    table = report.table
    lines = []
    for metric, title, transform, number_format in _METRICS:
        lines.append(f"== {title} ==")
        for section in ("seen", "unseen"):
            section_rows = table[table["seen"] == section]
            if section_rows.empty:
                continue
            lines.append(f"-- {section.capitalize()} noise --")
            for noise_type in dict.fromkeys(section_rows["noise_type"]):
                noise_rows = section_rows[
                    section_rows["noise_type"] == noise_type
                ]
                lines.append(f"[{noise_type}]")
                lines.extend(
                    _metric_block(
                        noise_rows,
                        metric,
                        transform,
                        number_format,
                        system_order,
                    )
                )
                lines.append("")
        lines.append("")
    return "\n".join(lines).rstrip() + "\n"
