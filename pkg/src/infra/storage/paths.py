"""Artifact path utilities for solver outputs and crosscheck reproductions."""
from pathlib import Path


class ArtifactPaths:
    """Utilities for managing artifact paths."""

    @staticmethod
    def repro_file(base_path: Path, seed: int, case: int) -> Path:
        """
        Path of the reproduction arena of a failing crosscheck case.

        Args:
            base_path: Reproduction directory
            seed: Run seed
            case: Case number within the run

        Returns:
            base_path/repro-<seed>-<case>.wga
        """
        return base_path / f"repro-{seed}-{case}.wga"

    @staticmethod
    def ensure_parent(path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
