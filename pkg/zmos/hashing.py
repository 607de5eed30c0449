"""
Content hashes and derived seeds.
"""


import hashlib
import json
from pathlib import Path
from typing import Any

_FILE_CHUNK_SIZE = 10 * 2**20
"""
Size of chunks to read when hashing a file.
"""


def sha256_file(path: Path) -> str:
    """
    Args:
        path: The file to hash.

    Returns:
        The hex SHA-256 digest of the file contents.

    """
    digest = hashlib.sha256()
    with path.open("rb") as file:
        while chunk := file.read(_FILE_CHUNK_SIZE):
            digest.update(chunk)
    return digest.hexdigest()


def sha256_json(value: Any) -> str:
    """
    Hashes a JSON-serializable value canonically, so that key order does
    not matter.

    Args:
        value: The value to hash.

    Returns:
        The hex SHA-256 digest.

    """
    canonical = json.dumps(value, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf8")).hexdigest()


def derive_seed(base_seed: int, *keys: str | int) -> int:
    """
    Derives an independent, reproducible seed from a base seed and a set of
    keys, such as a record ID or a cluster index.

    Args:
        base_seed: The base seed.
        *keys: Additional keys that identify the consumer of the seed.

    Returns:
        A seed in [0, 2**32).

    """
    material = ":".join([str(base_seed), *(str(k) for k in keys)])
    digest = hashlib.sha256(material.encode("utf8")).digest()
    return int.from_bytes(digest[:4], "little")
