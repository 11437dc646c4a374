import pytest

from src.domain.models import ConcretePath, LassoVerdict, ObjectiveKind, RunReport, Winner
from src.services.report_service import ReportService


@pytest.fixture()
def report() -> RunReport:
    return RunReport(
        arenaName="fig3",
        states=2,
        actions=1,
        observations=2,
        maxAbsWeight=1,
        objective=ObjectiveKind.DIRFIX,
        lmax=2,
        engine="explicit",
        winner=Winner.ADAM,
        wallTime=0.01234,
        counts={"gameVertices": 4, "unsafeVertices": 1},
    )


def test_text_report(report) -> None:
    text = ReportService().render(report)

    assert "arena      : fig3 (|Q|=2" in text
    assert "objective  : dirfix(lmax=2) at threshold 0" in text
    assert "winner     : adam" in text
    assert "gameVertices: 4" in text
    assert "time       : 0.012 s" in text
    assert "strategy" not in text
    assert "implies" not in text


def test_winning_report_lists_implied_objectives(report) -> None:
    won = report.model_copy(update={"winner": Winner.EVE, "strategySize": 3})

    text = ReportService().render(won)

    assert "strategy   : 3 memory states" in text
    implied = next(line for line in text.splitlines() if line.startswith("implies"))
    assert implied.split(": ", 1)[1].split(", ")[:2] == ["ufix", "udirbnd"]
    assert "mpsup" in implied


def test_kv_report(report) -> None:
    lines = ReportService().render(report, fmt="kv").splitlines()

    assert "winner=adam" in lines
    assert "objective=dirfix" in lines
    assert "strategySize=" in lines
    assert "wallTime=0.012" in lines
    assert "counts.gameVertices=4" in lines


def test_verdicts() -> None:
    witness = ConcretePath(states=("q0", "q1", "q1"), actions=("a", "a"))
    verdicts = [
        LassoVerdict(kind=ObjectiveKind.FIX, lmax=2, member=True),
        LassoVerdict(
            kind=ObjectiveKind.DIRFIX, lmax=2, member=False, violationPosition=0, witness=witness
        ),
    ]

    text = ReportService().render_verdicts(verdicts)
    kv = ReportService().render_verdicts(verdicts, fmt="kv")

    assert text.splitlines()[0] == "fix(2)      : yes"
    assert text.splitlines()[1] == "dirfix(2)   : no (witness q0 q1 q1, window opens at 0)"
    assert kv.splitlines() == ["fix(2)=yes", "dirfix(2)=no", "dirfix(2).violationPosition=0"]
