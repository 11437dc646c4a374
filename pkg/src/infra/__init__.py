"""Infrastructure layer - file formats, rendering, charts and artifact storage."""
