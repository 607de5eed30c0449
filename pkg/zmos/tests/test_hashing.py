"""
Tests for the `hashing` module.
"""


from pathlib import Path

from faker import Faker

from zmos import hashing


def test_sha256_file(tmp_path: Path) -> None:
    """
    Tests that files are hashed by content.

    Args:
        tmp_path: The directory to use for temporary files.

    """
    # Arrange.
    path = tmp_path / "file.txt"
    path.write_bytes(b"abc")

    # Act.
    digest = hashing.sha256_file(path)

    # Assert.
    assert digest == (
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    )


def test_sha256_json_ignores_key_order() -> None:
    """
    Tests that the JSON hash is canonical.
    """
    # Act.
    first = hashing.sha256_json({"a": 1, "b": [1.5, "x"]})
    second = hashing.sha256_json({"b": [1.5, "x"], "a": 1})
    changed = hashing.sha256_json({"a": 2, "b": [1.5, "x"]})

    # Assert.
    assert first == second
    assert first != changed


def test_derive_seed(faker: Faker) -> None:
    """
    Tests that derived seeds are reproducible, bounded and key-dependent.

    Args:
        faker: The fixture to use for generating fake data.

    """
    # Arrange.
    base_seed = faker.random_int()
    key = faker.word()

    # Act.
    seed = hashing.derive_seed(base_seed, key, 0)

    # Assert.
    assert seed == hashing.derive_seed(base_seed, key, 0)
    assert 0 <= seed < 2**32
    assert seed != hashing.derive_seed(base_seed, key, 1)
    assert seed != hashing.derive_seed(base_seed + 1, key, 0)
