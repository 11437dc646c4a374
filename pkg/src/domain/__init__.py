"""Domain layer - models, errors, and policies."""
