"""Altair charts of solver progress."""
from pathlib import Path
from typing import Sequence

import altair as alt
import pandas as pd

from src.infra.storage.paths import ArtifactPaths

BAR_COLOR = "#246BB0"


def create_progress_chart(sizes: Sequence[int], step_label: str, title: str) -> alt.Chart:
    """
    Create a bar chart of sizes per solver step.

    Args:
        sizes: One size per step (antichain per iteration, or G′ per BFS layer)
        step_label: Axis title for the steps
        title: Chart title

    Returns:
        Altair Chart object
    """
    if not sizes:
        # Return empty chart
        return alt.Chart(pd.DataFrame({"step": [], "size": []})).mark_bar()

    df = pd.DataFrame({"step": range(len(sizes)), "size": list(sizes)})
    df["cumulative"] = df["size"].cumsum()

    bars = (
        alt.Chart(df)
        .mark_bar(color=BAR_COLOR)
        .encode(
            x=alt.X("step:O", title=step_label),
            y=alt.Y("size:Q", title="Elements"),
            tooltip=[
                alt.Tooltip("step:O", title=step_label),
                alt.Tooltip("size:Q", title="Elements"),
                alt.Tooltip("cumulative:Q", title="Cumulative"),
            ],
        )
        .properties(width=max(300, len(df) * 30), height=300, title=title)
    )
    return bars


def save_chart(chart: alt.Chart, path: Path | str) -> Path:
    """
    Save a chart; the format follows the suffix (.html or .json).

    Raises:
        ValueError: On any other suffix
    """
    path = Path(path)
    if path.suffix not in (".html", ".json"):
        raise ValueError(f"unsupported chart format '{path.suffix}' (use .html or .json)")
    ArtifactPaths.ensure_parent(path)
    chart.save(str(path))
    return path
