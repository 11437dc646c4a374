import json

import pytest

from src.domain.models import MooreStrategy
from src.infra.charts.chart_builder import create_progress_chart, save_chart
from src.infra.dot.dot_builder import DotBuilder
from src.infra.storage.file_store import ArtifactStore
from src.infra.storage.paths import ArtifactPaths
from src.infra.templates import TemplateLoader, dot_escape
from src.services.dirfix_service import DirfixService
from src.services.parity_service import ParityService


def test_atomic_write_creates_parents(tmp_path) -> None:
    target = tmp_path / "a" / "b" / "out.txt"

    written = ArtifactStore().write_text(target, "hello\n")

    assert written == target
    assert target.read_text(encoding="utf-8") == "hello\n"
    assert not (target.parent / "out.txt.tmp").exists()


def test_write_model(tmp_path) -> None:
    strategy = MooreStrategy(
        memory=("m",), initialMemory="m", update={"m": {0: "m"}}, output={"m": {0: "a"}}
    )

    path = ArtifactStore().write_model(tmp_path / "s.json", strategy)

    data = json.loads(path.read_text(encoding="utf-8"))
    assert data["output"] == {"m": {"0": "a"}}


def test_repro_file_name(tmp_path) -> None:
    assert ArtifactPaths.repro_file(tmp_path, 3, 12) == tmp_path / "repro-3-12.wga"


def test_dot_escape() -> None:
    assert dot_escape('say "hi"\n') == 'say \\"hi\\"\\n'


def test_template_loader_caches() -> None:
    TemplateLoader.clear_cache()

    assert TemplateLoader.load() is TemplateLoader.load()


def test_missing_template_directory(tmp_path) -> None:
    with pytest.raises(FileNotFoundError):
        TemplateLoader.load(str(tmp_path / "nowhere"))


def test_arena_dot_clusters_blocks(fig3) -> None:
    dot = DotBuilder().arena(fig3, "fig3")

    assert dot.count("subgraph cluster_o") == 2
    assert '"q0" -> "q1" [label="a,-1"];' in dot


def test_safety_game_dot_marks_vertices(fig3) -> None:
    service = DirfixService()
    result = service.solve_dirfix(fig3, 2)

    dot = DotBuilder().safety_game(result.game, result.solution.winning)

    assert dot.startswith('digraph "safety game (lmax=2)"')
    assert dot.count("->") >= result.game.edge_count()


def test_parity_game_dot(fig2) -> None:
    result = ParityService().solve_fix(fig2, 1)

    dot = DotBuilder().parity_game(result.game, result.solution.regions)

    assert "{q0}" in dot


def test_progress_chart(tmp_path) -> None:
    chart = create_progress_chart([1, 3, 2], "Iteration", "Antichain size per iteration")

    path = save_chart(chart, tmp_path / "chart.json")

    spec = json.loads(path.read_text(encoding="utf-8"))
    assert spec["title"] == "Antichain size per iteration"


def test_empty_chart_and_bad_suffix(tmp_path) -> None:
    chart = create_progress_chart([], "Step", "No progress data")

    with pytest.raises(ValueError, match="unsupported chart format"):
        save_chart(chart, tmp_path / "chart.png")
