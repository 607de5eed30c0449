"""
Tests for the `main` module.
"""


import json
from pathlib import Path

import pytest
from faker import Faker
from pytest_mock import MockFixture

from zmos.dsp import load_waveform, save_waveform
from zmos.enhancement import ComponentEnsemble
from zmos.enhancement.tests.models import STFT, untrained_checkpoint
from zmos.errors import ZmosError
from zmos.nn import (
    ModelGraph,
    Normalization,
    NormStats,
    checkpoint_from_model,
    save_checkpoint,
)
from zmos.pipeline import Stage, main
from zmos.quality import QUALITY_NET_KIND, QualityNetConfig, quality_net_graph
from zmos.selection import ClusterSpec, Strategy


@pytest.fixture
def config_path(tmp_path: Path) -> Path:
    """
    Args:
        tmp_path: The directory to use for temporary files.

    Returns:
        An experiment file using the defaults.

    """
    path = tmp_path / "experiment.json"
    path.write_text("{}", encoding="utf8")
    return path


def test_config_error_exit_code(tmp_path: Path) -> None:
    """
    Tests the exit status for an invalid experiment file.

    Args:
        tmp_path: The directory to use for temporary files.

    """
    # Arrange.
    path = tmp_path / "experiment.json"
    path.write_text('{"zmos": {"num_clusters": 0}}', encoding="utf8")

    # Act.
    status = main.run(["synth", "--config", str(path)])

    # Assert.
    assert status == main.EXIT_CONFIG_ERROR


def test_missing_prerequisite_exit_code(config_path: Path) -> None:
    """
    Tests the exit status for a stage that runs too early.

    Args:
        config_path: The experiment file.

    """
    # Act.
    status = main.run(["cluster", "--config", str(config_path)])

    # Assert.
    assert status == main.EXIT_MISSING_PREREQUISITE


@pytest.mark.parametrize(
    "error", [ZmosError("bad"), RuntimeError("worse")], ids=["zmos", "other"]
)
def test_failure_exit_code(
    config_path: Path, mocker: MockFixture, error: Exception
) -> None:
    """
    Tests the exit status when a stage fails.

    Args:
        config_path: The experiment file.
        mocker: The fixture to use for mocking.
        error: The error the stage raises.

    """
    # Arrange.
    mocker.patch.object(main, "run_stage", side_effect=error)

    # Act.
    status = main.run(["synth", "--config", str(config_path)])

    # Assert.
    assert status == main.EXIT_FAILURE


def test_stage_arguments(config_path: Path, mocker: MockFixture) -> None:
    """
    Tests that stage options reach the stage runner.

    Args:
        config_path: The experiment file.
        mocker: The fixture to use for mocking.

    """
    # Arrange.
    mock_run_stage = mocker.patch.object(main, "run_stage")

    # Act.
    status = main.run(
        ["train-se", "--config", str(config_path), "--force", "--jobs", "3"]
    )

    # Assert.
    assert status == main.EXIT_OK
    mock_run_stage.assert_called_once()
    stage, config = mock_run_stage.call_args.args
    assert stage == Stage.TRAIN_SE
    assert config.runtime.jobs == 3
    assert mock_run_stage.call_args.kwargs == dict(force=True)


def test_all_stages(config_path: Path, mocker: MockFixture) -> None:
    """
    Tests that "all" runs the whole pipeline.

    Args:
        config_path: The experiment file.
        mocker: The fixture to use for mocking.

    """
    # Arrange.
    mock_run_all = mocker.patch.object(main, "run_all")

    # Act.
    status = main.run(["all", "--config", str(config_path)])

    # Assert.
    assert status == main.EXIT_OK
    mock_run_all.assert_called_once()
    assert mock_run_all.call_args.kwargs == dict(force=False)


def test_jobs_must_be_positive(config_path: Path) -> None:
    """
    Tests that the job count is validated.

    Args:
        config_path: The experiment file.

    """
    # Act and assert.
    with pytest.raises(SystemExit):
        main.run(["synth", "--config", str(config_path), "--jobs", "0"])


@pytest.fixture
def train_se_dir(tmp_path: Path, faker: Faker) -> Path:
    """
    Saves a single-cluster QS ensemble the way the train-se stage does.

    Args:
        tmp_path: The directory to use for temporary files.
        faker: The fixture to use for generating fake data.

    Returns:
        The train-se stage directory.

    """
    qnet_config = QualityNetConfig(blstm_hidden=4, embed_dim=3)
    stats = NormStats(mean=[-5.0] * STFT.n_bins, std=[3.0] * STFT.n_bins)
    graph = quality_net_graph(qnet_config, STFT.n_bins)
    qnet = checkpoint_from_model(
        ModelGraph(graph, seed=faker.random_int()),
        kind=QUALITY_NET_KIND,
        normalization=Normalization(input=stats),
    )
    qnet_path = tmp_path / "qnet.ckpt"
    save_checkpoint(qnet, qnet_path)

    cluster_spec = ClusterSpec(
        strategy=Strategy.QS,
        num_clusters=1,
        qs_means=[0.5],
        assignments={"u0": 0},
    )
    directory = tmp_path / "train-se"
    ComponentEnsemble(cluster_spec, {0: untrained_checkpoint()}).save(
        directory / "qs", qnet_path=qnet_path
    )
    return directory


def test_enhance_file(
    tmp_path: Path,
    faker: Faker,
    train_se_dir: Path,
    capsys: pytest.CaptureFixture,
) -> None:
    """
    Tests single-file enhancement, twice, from the train-se directory.

    Args:
        tmp_path: The directory to use for temporary files.
        faker: The fixture to use for generating fake data.
        train_se_dir: The train-se stage directory.
        capsys: The fixture to use for capturing output.

    """
    # Arrange.
    noisy = faker.noise_waveform(num_samples=5000, scale=0.1)
    save_waveform(noisy, tmp_path / "noisy.wav")
    outputs = [tmp_path / "first.wav", tmp_path / "second.wav"]

    # Act.
    statuses = [
        main.run(
            [
                "enhance-file",
                "--input",
                str(tmp_path / "noisy.wav"),
                "--ensemble",
                str(train_se_dir),
                "--strategy",
                "qs",
                "--output",
                str(output),
                "--diagnostics",
            ]
        )
        for output in outputs
    ]

    # Assert.
    assert statuses == [main.EXIT_OK, main.EXIT_OK]
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "0"
    diagnostics = json.loads("\n".join(lines[1 : len(lines) // 2]))
    assert diagnostics["chosen"] == 0
    assert diagnostics["strategy"] == "qs"
    assert len(load_waveform(outputs[0]).samples) == 5000
    assert outputs[0].read_bytes() == outputs[1].read_bytes()


def test_enhance_file_no_ensemble(
    tmp_path: Path, faker: Faker, train_se_dir: Path
) -> None:
    """
    Tests asking for a strategy with no ensemble.

    Args:
        tmp_path: The directory to use for temporary files.
        faker: The fixture to use for generating fake data.
        train_se_dir: The train-se stage directory.

    """
    # Arrange.
    save_waveform(faker.noise_waveform(), tmp_path / "noisy.wav")

    # Act.
    status = main.run(
        [
            "enhance-file",
            "--input",
            str(tmp_path / "noisy.wav"),
            "--ensemble",
            str(train_se_dir),
            "--strategy",
            "qe",
            "--output",
            str(tmp_path / "out.wav"),
        ]
    )

    # Assert.
    assert status == main.EXIT_FAILURE
    assert not (tmp_path / "out.wav").exists()
