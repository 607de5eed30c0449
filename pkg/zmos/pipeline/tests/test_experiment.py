"""
Tests for the `experiment` module.
"""


import json
from pathlib import Path
from typing import Any, Dict

import pytest

from zmos.config import ConfigError
from zmos.corpus import NoiseType
from zmos.enhancement import SeModelSpec, SePreset
from zmos.pipeline import ExperimentConfig, load_experiment_config
from zmos.pipeline.experiment import ensure_writable_root
from zmos.pipeline.schemas import PathsConfig
from zmos.selection import Strategy


def _write(path: Path, settings: Dict[str, Any]) -> Path:
    path.write_text(json.dumps(settings), encoding="utf8")
    return path


def test_defaults_match_schema(tmp_path: Path) -> None:
    """
    Tests that the packaged defaults are the schema defaults.

    Args:
        tmp_path: The directory to use for temporary files.

    """
    # Arrange.
    config_path = _write(tmp_path / "experiment.json", {})

    # Act.
    config = load_experiment_config(config_path)

    # Assert.
    assert config.paths.root == tmp_path.resolve() / "experiment"
    expected = ExperimentConfig(paths=PathsConfig(root=config.paths.root))
    assert config == expected
    assert config.zmos.num_clusters == 4
    assert config.zmos.strategies == [Strategy.QS, Strategy.QE]
    assert config.se.model_spec == SeModelSpec.from_preset(SePreset.DESK)


def test_overrides_merge_with_defaults(tmp_path: Path) -> None:
    """
    Tests that a partial section only replaces the fields it names.

    Args:
        tmp_path: The directory to use for temporary files.

    """
    # Arrange.
    config_path = _write(
        tmp_path / "experiment.json",
        {
            "paths": {"root": str(tmp_path / "elsewhere")},
            "corpus": {"n_train_utts": 12, "noise_types": {"unseen": []}},
            "zmos": {"strategies": ["qe"], "num_clusters": 2},
        },
    )

    # Act.
    config = load_experiment_config(config_path)

    # Assert.
    assert config.paths.root == tmp_path / "elsewhere"
    assert config.corpus.n_train_utts == 12
    assert config.corpus.n_test_utts == 10
    assert config.corpus.noise_types.seen == [
        NoiseType.WHITE,
        NoiseType.ENGINE,
    ]
    assert config.corpus.noise_types.unseen == []
    assert config.zmos.strategies == [Strategy.QE]
    assert config.zmos.num_clusters == 2
    assert config.zmos.kmeans.max_iter == 100


@pytest.mark.parametrize(
    ("settings", "paths"),
    [
        ({"corpus": {"train_snrs_db": []}}, ["corpus.train_snrs_db"]),
        ({"zmos": {"num_clusters": 0}}, ["zmos.num_clusters"]),
        (
            {"qnet": {"epochs": -1}, "stft": {"hop": 0}},
            ["qnet.epochs", "stft.hop"],
        ),
        ({"zmos": {"strategies": ["qs", "qs"]}}, ["zmos.strategies"]),
        ({"unknown": 1}, ["unknown"]),
    ],
    ids=["empty_list", "zero_clusters", "two_fields", "repeat", "extra"],
)
def test_validation_errors_name_fields(
    tmp_path: Path, settings: Dict[str, Any], paths: list[str]
) -> None:
    """
    Tests that every invalid field is reported by its dotted path.

    Args:
        tmp_path: The directory to use for temporary files.
        settings: The invalid settings.
        paths: The fields that should be reported.

    """
    # Arrange.
    config_path = _write(tmp_path / "experiment.json", settings)

    # Act.
    with pytest.raises(ConfigError) as error:
        load_experiment_config(config_path)

    # Assert.
    for path in paths:
        assert f"{path}:" in str(error.value)


def test_invalid_json(tmp_path: Path) -> None:
    """
    Tests that syntax errors are reported with their position.

    Args:
        tmp_path: The directory to use for temporary files.

    """
    # Arrange.
    config_path = tmp_path / "experiment.json"
    config_path.write_text('{\n  "zmos": {,}\n}', encoding="utf8")

    # Act and assert.
    with pytest.raises(ConfigError, match=r"experiment.json:2:"):
        load_experiment_config(config_path)


@pytest.mark.parametrize("content", ["[1, 2]", "3"], ids=["list", "number"])
def test_top_level_not_object(tmp_path: Path, content: str) -> None:
    """
    Tests that the file must hold a JSON object.

    Args:
        tmp_path: The directory to use for temporary files.
        content: The file contents.

    """
    # Arrange.
    config_path = tmp_path / "experiment.json"
    config_path.write_text(content, encoding="utf8")

    # Act and assert.
    with pytest.raises(ConfigError, match="JSON object"):
        load_experiment_config(config_path)


def test_missing_file(tmp_path: Path) -> None:
    """
    Tests loading a file that doesn't exist.

    Args:
        tmp_path: The directory to use for temporary files.

    """
    # Act and assert.
    with pytest.raises(ConfigError, match="does not exist"):
        load_experiment_config(tmp_path / "missing.json")


def test_ensure_writable_root(tmp_path: Path) -> None:
    """
    Tests that the root is created, and that a file can't be a root.

    Args:
        tmp_path: The directory to use for temporary files.

    """
    # Arrange.
    root = tmp_path / "a" / "b"
    (tmp_path / "file").write_text("")
    good = ExperimentConfig(paths=PathsConfig(root=root))
    bad = ExperimentConfig(paths=PathsConfig(root=tmp_path / "file" / "c"))

    # Act and assert.
    assert ensure_writable_root(good) == root
    assert root.is_dir()
    with pytest.raises(ConfigError, match="paths.root"):
        ensure_writable_root(bad)
