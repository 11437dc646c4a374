"""Jinja2 template loader for DOT, HOA and report rendering."""
from pathlib import Path
from typing import Any, Optional

from jinja2 import Environment, FileSystemLoader, StrictUndefined

TEMPLATES_DIR = Path(__file__).parent.parent.parent / "assets" / "templates"


def dot_escape(value: Any) -> str:
    """Quote-safe text for a DOT string literal."""
    return str(value).replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")


class TemplateLoader:
    """Loader for the template environment with caching."""

    _cache: Optional[Environment] = None
    _cache_path: Optional[str] = None

    @classmethod
    def load(cls, templates_path: Optional[str] = None) -> Environment:
        """
        Load the template environment.

        Args:
            templates_path: Optional template directory.
                        Defaults to assets/templates

        Returns:
            Environment with the `dot` filter registered

        Raises:
            FileNotFoundError: If the directory doesn't exist
        """
        if templates_path is None:
            templates_path = str(TEMPLATES_DIR)

        # Return cached environment if loading same directory
        if cls._cache is not None and cls._cache_path == templates_path:
            return cls._cache

        if not Path(templates_path).is_dir():
            raise FileNotFoundError(f"Template directory not found: {templates_path}")

        env = Environment(
            loader=FileSystemLoader(templates_path),
            autoescape=False,
            trim_blocks=True,
            lstrip_blocks=True,
            keep_trailing_newline=True,
            undefined=StrictUndefined,
        )
        env.filters["dot"] = dot_escape

        cls._cache = env
        cls._cache_path = templates_path
        return env

    @classmethod
    def render(cls, name: str, /, **context: Any) -> str:
        return cls.load().get_template(name).render(**context)

    @classmethod
    def clear_cache(cls):
        """Clear the environment cache."""
        cls._cache = None
        cls._cache_path = None
