"""Artifact store writing solver outputs atomically."""
import json
import logging
from pathlib import Path
from typing import Any, Dict

from pydantic import BaseModel

from src.infra.storage.paths import ArtifactPaths

logger = logging.getLogger(__name__)


class ArtifactStore:
    """Writes text and JSON artifacts through a temporary file and an atomic rename."""

    def write_text(self, path: Path | str, content: str) -> Path:
        """
        Write text to a file atomically.

        Args:
            path: Destination
            content: File content

        Returns:
            The destination path

        Raises:
            OSError: If the write fails; no partial file is left behind
        """
        path = Path(path)
        ArtifactPaths.ensure_parent(path)
        temp_path = path.with_name(path.name + ".tmp")

        try:
            # Write to temporary file first
            with open(temp_path, "w", encoding="utf-8") as f:
                f.write(content)

            # Atomic rename
            temp_path.replace(path)

        except Exception:
            # Clean up temp file if it exists
            if temp_path.exists():
                temp_path.unlink()
            raise

        logger.debug("wrote %s (%d bytes)", path, len(content.encode("utf-8")))
        return path

    def write_json(self, path: Path | str, data: Dict[str, Any]) -> Path:
        return self.write_text(path, json.dumps(data, indent=2, ensure_ascii=False) + "\n")

    def write_model(self, path: Path | str, model: BaseModel) -> Path:
        """Write a pydantic model as indented JSON."""
        return self.write_json(path, model.model_dump(mode="json"))
