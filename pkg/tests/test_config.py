import pytest

from src.config import AppConfig, ConfigLoader, SolverSettings


@pytest.fixture(autouse=True)
def fresh_cache():
    ConfigLoader.clear_cache()
    yield
    ConfigLoader.clear_cache()


def test_bundled_config_matches_defaults() -> None:
    config = ConfigLoader.load()

    assert config == AppConfig()
    assert config.solver.defaultEngine == "explicit"
    assert config.artifacts.reproDir == "crosscheck-repro"


def test_loader_caches_per_path() -> None:
    assert ConfigLoader.load() is ConfigLoader.load()


def test_partial_file_keeps_defaults(tmp_path) -> None:
    path = tmp_path / "config.yaml"
    path.write_text("solver:\n  parityEngine: spm\ncrosscheck:\n  count: 5\n", encoding="utf-8")

    config = ConfigLoader.load(str(path))

    assert config.solver.parityEngine == "spm"
    assert config.solver.maxStates == 2_000_000
    assert config.crosscheck.count == 5


def test_missing_file(tmp_path) -> None:
    with pytest.raises(FileNotFoundError):
        ConfigLoader.load(str(tmp_path / "absent.yaml"))


@pytest.mark.parametrize(
    "content",
    ["solver: [unclosed\n", "solver:\n  defaultEngine: magic\n", "crosscheck:\n  count: 0\n"],
)
def test_invalid_file(tmp_path, content: str) -> None:
    path = tmp_path / "config.yaml"
    path.write_text(content, encoding="utf-8")

    with pytest.raises(ValueError):
        ConfigLoader.load(str(path))


def test_settings_bounds() -> None:
    with pytest.raises(ValueError):
        SolverSettings(maxStates=0)
