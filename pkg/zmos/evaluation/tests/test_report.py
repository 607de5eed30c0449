"""
Tests for the `report` module.
"""


from pathlib import Path

import numpy as np
import pandas as pd
import pytest
from faker import Faker
from pytest_mock import MockFixture

from zmos.corpus import Split, UtteranceRecord
from zmos.corpus.generators import generate_clean
from zmos.corpus.mixing import mix_at_snr
from zmos.dsp import Waveform, WavSubtype, save_waveform
from zmos.errors import ZmosError
from zmos.evaluation import report
from zmos.evaluation.metrics import MetricError

NOISE_TYPES = ["white", "car"]
SNRS = [15.0, 10.0, 5.0, 0.0, -5.0, -10.0]
SYSTEMS = ["Noisy", "Baseline", "ZMOS-QS", "ZMOS-QE"]


@pytest.fixture
def grid_records(faker: Faker) -> list[UtteranceRecord]:
    """
    Creates two test records for every noise type and SNR.

    Args:
        faker: The fixture to use for generating fake data.

    Returns:
        The records, with nonexistent audio paths.

    """
    return [
        faker.utterance_record(
            split=Split.TEST,
            id=f"test-{index:04d}-{noise_type}-{snr_db:g}",
            noise_type=noise_type,
            snr_db=snr_db,
        )
        for noise_type in NOISE_TYPES
        for snr_db in SNRS
        for index in range(2)
    ]


def _fake_system(offset: float):
    """
    Creates a system whose output encodes a score that depends on the
    system and the record.

    Args:
        offset: Added to every score of this system.

    Returns:
        The system function.

    """

    def _system(record: UtteranceRecord) -> Waveform:
        index = int(record.id.split("-")[1])
        value = offset + record.snr_db / 100.0 + index / 1000.0
        return Waveform(samples=np.full(8, value), sample_rate=16000)

    return _system


@pytest.fixture
def mock_metrics(mocker: MockFixture) -> None:
    """
    Replaces the audio loader and metrics so that a "score" is just the
    first sample of the system output.

    Args:
        mocker: The fixture to use for mocking.

    """
    mocker.patch.object(
        report,
        "load_waveform",
        return_value=Waveform(samples=np.zeros(8), sample_rate=16000),
    )
    for name in ("stoi", "segmental_snr", "quality_target"):
        mocker.patch.object(
            report,
            name,
            side_effect=lambda _, output: float(output.samples[0]),
        )


@pytest.mark.usefixtures("mock_metrics")
def test_evaluate_corpus_grid(grid_records: list[UtteranceRecord]) -> None:
    """
    Tests that a grid of conditions produces one cell per system, noise type
    and SNR, plus one average per system and noise type.

    Args:
        grid_records: The records to evaluate.

    """
    # Arrange.
    systems = {
        name: _fake_system(float(offset))
        for offset, name in enumerate(SYSTEMS)
    }

    # Act.
    got_report = report.evaluate_corpus(grid_records, systems, ["white"])

    # Assert.
    cells = got_report.cells()
    averages = got_report.averages()
    assert len(cells) == 48
    assert len(averages) == 8
    assert not got_report.failures
    assert len(got_report.scores) == len(grid_records) * len(SYSTEMS)
    assert (cells["n_utts"] == 2).all()

    # Systems appear in the order given, seen noise before unseen.
    assert list(dict.fromkeys(got_report.table["system"])) == SYSTEMS
    first_system = got_report.table[got_report.table["system"] == "Noisy"]
    assert list(dict.fromkeys(first_system["noise_type"])) == NOISE_TYPES
    assert list(first_system["seen"].iloc[:7]) == ["seen"] * 7
    assert list(first_system["snr_db"].iloc[:7]) == [
        "15",
        "10",
        "5",
        "0",
        "-5",
        "-10",
        report.AVERAGE_LABEL,
    ]

    # Cell means are over the two records in each cell.
    baseline_cell = cells[
        (cells["system"] == "Baseline")
        & (cells["noise_type"] == "car")
        & (cells["snr_db"] == "5")
    ]
    assert baseline_cell["stoi"].item() == pytest.approx(1.0 + 0.05 + 0.0005)


@pytest.mark.usefixtures("mock_metrics")
def test_averages_are_cell_means(grid_records: list[UtteranceRecord]) -> None:
    """
    Tests that each "ave" row is the mean of the per-SNR cells above it.

    Args:
        grid_records: The records to evaluate.

    """
    # Arrange.
    systems = {
        name: _fake_system(float(offset))
        for offset, name in enumerate(SYSTEMS)
    }

    # Act.
    got_report = report.evaluate_corpus(grid_records, systems, ["white"])

    # Assert.
    cells = got_report.cells()
    for _, average in got_report.averages().iterrows():
        group = cells[
            (cells["system"] == average["system"])
            & (cells["noise_type"] == average["noise_type"])
        ]
        for metric in report.METRIC_COLUMNS:
            assert average[metric] == group[metric].mean()
        assert average["n_utts"] == group["n_utts"].sum()


@pytest.mark.usefixtures("mock_metrics")
def test_evaluate_corpus_failures(
    grid_records: list[UtteranceRecord],
) -> None:
    """
    Tests that a system that fails on some records has those records
    excluded from its means, without affecting other systems.

    Args:
        grid_records: The records to evaluate.

    """
    # Arrange.
    working = _fake_system(0.0)

    def _flaky(record: UtteranceRecord) -> Waveform:
        if record.id.startswith("test-0001"):
            raise MetricError("Output too short.")
        return working(record)

    systems = {"Noisy": working, "Flaky": _flaky}

    # Act.
    got_report = report.evaluate_corpus(grid_records, systems, ["white"])

    # Assert.
    assert len(got_report.failures) == len(grid_records) // 2
    assert {f.system for f in got_report.failures} == {"Flaky"}
    cells = got_report.cells()
    assert (cells[cells["system"] == "Flaky"]["n_utts"] == 1).all()
    assert (cells[cells["system"] == "Noisy"]["n_utts"] == 2).all()


def test_evaluate_corpus_requires_noisy(
    grid_records: list[UtteranceRecord],
) -> None:
    """
    Tests that the unprocessed input must always be one of the systems.

    Args:
        grid_records: The records to evaluate.

    """
    # Act and assert.
    with pytest.raises(ZmosError, match="Noisy"):
        report.evaluate_corpus(
            grid_records, {"Baseline": _fake_system(0.0)}, ["white"]
        )


def test_evaluate_single_record(tmp_path: Path, faker: Faker) -> None:
    """
    Tests scoring the unprocessed input on a one-record corpus with the
    real metrics.

    Args:
        tmp_path: The directory to write audio to.
        faker: The fixture to use for generating fake data.

    """
    # Arrange.
    clean = generate_clean(np.random.default_rng(3), 24000, 16000)
    noise = faker.noise_waveform(num_samples=24000, scale=0.05)
    noisy, _ = mix_at_snr(clean, noise, 5.0, seed=0)
    clean_path = tmp_path / "clean.wav"
    noisy_path = tmp_path / "noisy.wav"
    save_waveform(clean, clean_path, subtype=WavSubtype.FLOAT)
    save_waveform(noisy, noisy_path, subtype=WavSubtype.FLOAT)
    record = faker.utterance_record(
        split=Split.TEST,
        clean_path=clean_path,
        noisy_path=noisy_path,
        noise_type="car",
        snr_db=5.0,
    )

    # Act.
    got_report = report.evaluate_corpus(
        [record], {"Noisy": report.noisy_system}, ["white"]
    )

    # Assert.
    cells = got_report.cells()
    assert len(cells) == 1
    cell = cells.iloc[0]
    assert cell["seen"] == "unseen"
    assert cell["snr_db"] == "5"
    assert 0.0 < cell["stoi"] < 1.0
    assert cell["quality_target"] == cell["stoi"]
    assert -10.0 <= cell["segsnr_db"] <= 35.0
    assert len(got_report.averages()) == 1


@pytest.mark.usefixtures("mock_metrics")
def test_write_csv(
    tmp_path: Path, grid_records: list[UtteranceRecord]
) -> None:
    """
    Tests that the report CSV has the expected header and can be read back.

    Args:
        tmp_path: The directory to write to.
        grid_records: The records to evaluate.

    """
    # Arrange.
    got_report = report.evaluate_corpus(
        grid_records, {"Noisy": _fake_system(0.0)}, ["white"]
    )
    csv_path = tmp_path / "report.csv"

    # Act.
    got_report.write_csv(csv_path)

    # Assert.
    header = csv_path.read_text().splitlines()[0]
    assert header == ",".join(report.REPORT_COLUMNS)
    reread = pd.read_csv(csv_path, dtype={"snr_db": str})
    assert len(reread) == len(got_report.table)
    np.testing.assert_allclose(
        reread["stoi"], got_report.table["stoi"], atol=1e-6
    )


def test_aggregate_empty() -> None:
    """
    Tests that aggregating no scores gives an empty table.
    """
    # Act.
    table = report.aggregate([], ["Noisy"])

    # Assert.
    assert table.empty
    assert list(table.columns) == list(report.REPORT_COLUMNS)
