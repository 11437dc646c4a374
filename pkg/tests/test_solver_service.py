import logging

import pytest

from src.config import SolverSettings
from src.domain.errors import ResourceLimitError, UndecidableObjectiveError, ValidationError
from src.domain.models import Objective, ObjectiveKind, Winner
from src.services.solver_service import SolverService


@pytest.fixture()
def solver() -> SolverService:
    return SolverService()


def dirfix(lmax: int, a: int = 0, b: int = 1) -> Objective:
    return Objective(kind=ObjectiveKind.DIRFIX, lmax=lmax, numerator=a, denominator=b)


@pytest.mark.parametrize("engine", ["explicit", "antichain"])
def test_dirfix_engines(solver, fig3, engine: str) -> None:
    outcome = solver.solve(fig3, dirfix(2), engine=engine, arena_name="fig3")

    assert outcome.winner == Winner.ADAM
    assert outcome.report.engine == engine
    assert outcome.report.arenaName == "fig3"
    assert outcome.strategy is None


def test_explicit_engine_reports_construction_counts(solver, fig3) -> None:
    report = solver.solve(fig3, dirfix(2)).report

    assert set(report.counts) == {"gameVertices", "unsafeVertices", "gameEdges", "winningVertices"}
    assert report.counts["unsafeVertices"] >= 1


def test_winning_run_carries_a_strategy(solver, zero_arena) -> None:
    outcome = solver.solve(zero_arena, dirfix(2))

    assert outcome.winner == Winner.EVE
    assert outcome.report.strategySize == 1
    assert outcome.strategy is outcome.dirfix.strategy


def test_threshold_shifts_the_verdict(solver, zero_arena) -> None:
    outcome = solver.solve(zero_arena, dirfix(2, a=1, b=2))

    assert outcome.winner == Winner.ADAM
    assert outcome.report.threshold == "1/2"
    assert outcome.report.maxAbsWeight == 1


def test_fix_goes_through_the_parity_pipeline(solver, fig2) -> None:
    outcome = solver.solve(fig2, Objective(kind=ObjectiveKind.FIX, lmax=2))

    assert outcome.winner == Winner.EVE
    assert outcome.report.engine == "parity/zielonka"
    assert outcome.parity is not None
    assert outcome.progress()[0] == []


def test_spm_engine_from_settings(fig2) -> None:
    solver = SolverService(SolverSettings(parityEngine="spm"))

    outcome = solver.solve(fig2, Objective(kind=ObjectiveKind.UFIX, lmax=2))

    assert outcome.winner == Winner.ADAM
    assert outcome.report.engine == "parity/spm"


def test_progress_series(solver, fig3) -> None:
    sizes, label, _ = solver.solve(fig3, dirfix(2)).progress()
    assert label == "BFS layer"
    assert sizes[0] == 1

    sizes, label, _ = solver.solve(fig3, dirfix(2), engine="antichain").progress()
    assert label == "Iteration"
    assert len(sizes) >= 1


def test_bounded_kinds_are_rejected(solver, fig3) -> None:
    with pytest.raises(UndecidableObjectiveError, match="undecidable objective udirbnd"):
        solver.solve(fig3, Objective(kind=ObjectiveKind.UDIRBND))


def test_reference_kinds_are_not_solved(solver, fig3) -> None:
    with pytest.raises(ValidationError, match="use check"):
        solver.solve(fig3, Objective(kind=ObjectiveKind.MPINF))


def test_unknown_engine(solver, fig3) -> None:
    with pytest.raises(ValidationError, match="unknown engine"):
        solver.solve(fig3, dirfix(1), engine="symbolic")


def test_resource_limit_applies_to_every_engine(fig3) -> None:
    solver = SolverService(SolverSettings(maxStates=1))

    with pytest.raises(ResourceLimitError):
        solver.solve(fig3, dirfix(2))


def test_large_lmax_is_logged(solver, zero_arena, caplog, monkeypatch) -> None:
    monkeypatch.setattr(logging.getLogger("src"), "propagate", True)
    with caplog.at_level(logging.WARNING, logger="src.domain.policies"):
        solver.solve(zero_arena, dirfix(5))

    assert "may explode" in caplog.text
