"""
Schema definitions common to all packages.
"""


from pathlib import Path
from typing import Any, Type, TypeVar

from pydantic import BaseModel


class _ZmosModelConfig:
    """
    Default config class for ZmosModels.
    """

    allow_mutation = False
    extra = "forbid"


ModelType = TypeVar("ModelType", bound="ZmosModel")


class ZmosModel(BaseModel):
    """
    Implements the default configuration for models that are persisted to
    disk or read from configuration. Field names are written exactly as
    declared.
    """

    Config = _ZmosModelConfig

    def write_json(self, path: Path, **kwargs: Any) -> None:
        """
        Writes the model to a JSON file.

        Args:
            path: The file to write.
            **kwargs: Forwarded to `json()`.

        """
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.json(indent=2, **kwargs) + "\n", encoding="utf8")

    @classmethod
    def read_json(cls: Type[ModelType], path: Path) -> ModelType:
        """
        Reads a model from a JSON file.

        Args:
            path: The file to read.

        Returns:
            The parsed model.

        """
        return cls.parse_file(path)
