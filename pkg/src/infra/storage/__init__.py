"""Artifact storage: atomic file writes and output paths."""
