"""Solver Service: one entry point for every decidable window objective."""
import logging
import time
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from src.config import SolverSettings
from src.domain.errors import ValidationError
from src.domain.models import Arena, MooreStrategy, Objective, ObjectiveKind, RunReport, Winner
from src.domain.policies import MEAN_PAYOFF_KINDS, require_decidable, warn_if_large_lmax
from src.services.antichain_service import AntichainResult, AntichainService
from src.services.arena_service import ArenaService
from src.services.dirfix_service import DirfixResult, DirfixService
from src.services.observer_service import ObserverService
from src.services.parity_service import ParityResult, ParityService

logger = logging.getLogger(__name__)

ENGINES = ("explicit", "antichain")


@dataclass
class SolveOutcome:
    """Report of a run together with the engine's own result."""

    report: RunReport
    strategy: Optional[MooreStrategy] = None
    dirfix: Optional[DirfixResult] = None
    antichain: Optional[AntichainResult] = None
    parity: Optional[ParityResult] = None

    @property
    def winner(self) -> Winner:
        return self.report.winner

    def progress(self):
        """Per-step sizes for charts: antichain iterations or G′ layers."""
        if self.antichain is not None:
            return self.antichain.iteration_sizes, "Iteration", "Antichain size per iteration"
        if self.dirfix is not None:
            return list(self.dirfix.game.layer_sizes), "BFS layer", "Safety game vertices per layer"
        return [], "Step", "No progress data"


class SolverService:
    """Service dispatching objectives to the DirFix, antichain and parity engines."""

    def __init__(self, settings: Optional[SolverSettings] = None):
        """
        Initialize the solver service.

        Args:
            settings: Solver defaults and resource guards
        """
        self.settings = settings or SolverSettings()
        limit = self.settings.maxStates
        self.arena_service = ArenaService()
        self.dirfix_service = DirfixService(max_states=limit)
        self.antichain_service = AntichainService(self.dirfix_service, max_states=limit)
        self.observer_service = ObserverService(self.arena_service, max_states=limit)
        self.parity_service = ParityService(self.observer_service, max_states=limit)

    def solve(
        self,
        arena: Arena,
        objective: Objective,
        engine: Optional[str] = None,
        arena_name: str = "arena",
    ) -> SolveOutcome:
        """
        Solve a window objective on an arena.

        The threshold is applied by rescaling before any engine runs. DirFix
        goes to the explicit or antichain engine, Fix and UFix to the parity
        pipeline.

        Args:
            arena: The arena as read
            objective: DirFix, UFix or Fix with lmax and threshold
            engine: "explicit" or "antichain" for DirFix; defaults from settings
            arena_name: Name used in the report

        Returns:
            The outcome with its run report

        Raises:
            UndecidableObjectiveError: For bounded window kinds
            ValidationError: For reference-only kinds or an unknown engine
            ResourceLimitError: If a construction exceeds maxStates
        """
        require_decidable(objective.kind)
        if objective.kind in MEAN_PAYOFF_KINDS:
            raise ValidationError(
                f"{objective.kind.value} is a lasso reference kind; use check instead of solve"
            )
        engine = engine or self.settings.defaultEngine
        if engine not in ENGINES:
            raise ValidationError(f"unknown engine '{engine}'")

        scaled = self.arena_service.rescale(arena, objective.numerator, objective.denominator)
        lmax = objective.lmax
        warn_if_large_lmax(scaled, lmax, self.settings.lmaxWarnFactor)

        start = time.perf_counter()
        engine_name, winner, counts, results = self._dispatch(scaled, objective.kind, lmax, engine)
        elapsed = time.perf_counter() - start

        strategy = results.get("strategy")
        report = RunReport(
            arenaName=arena_name,
            states=len(arena.states),
            actions=len(arena.alphabet),
            observations=len(arena.blocks),
            maxAbsWeight=scaled.max_abs_weight,
            objective=objective.kind,
            lmax=lmax,
            threshold=str(objective.threshold),
            engine=engine_name,
            winner=winner,
            strategySize=len(strategy.memory) if strategy else None,
            wallTime=elapsed,
            counts=counts,
        )
        logger.info(
            "%s(%d) on %s: %s wins (%s, %.3fs)",
            objective.kind.value,
            lmax,
            arena_name,
            winner.value,
            engine_name,
            elapsed,
        )
        return SolveOutcome(report=report, **results)

    def _dispatch(
        self, arena: Arena, kind: ObjectiveKind, lmax: int, engine: str
    ) -> Tuple[str, Winner, Dict[str, int], Dict[str, object]]:
        """Run one engine; returns its name, verdict, construction counts and raw results."""
        if kind == ObjectiveKind.DIRFIX and engine == "explicit":
            result = self.dirfix_service.solve_dirfix(arena, lmax)
            counts = {
                "gameVertices": len(result.game.vertices),
                "unsafeVertices": len(result.game.unsafe),
                "gameEdges": result.game.edge_count(),
                "winningVertices": len(result.solution.winning),
            }
            results = {"dirfix": result, "strategy": result.strategy}
            return "explicit", result.winner, counts, results

        if kind == ObjectiveKind.DIRFIX:
            result = self.antichain_service.solve_dirfix_antichain(arena, lmax)
            counts = {
                "iterations": len(result.iteration_sizes),
                "fixpointSize": len(result.fixpoint),
                "maxAntichain": max(result.iteration_sizes, default=0),
            }
            return "antichain", result.winner, counts, {"antichain": result}

        parity_engine = self.settings.parityEngine
        if kind == ObjectiveKind.FIX:
            result = self.parity_service.solve_fix(arena, lmax, parity_engine)
        else:
            result = self.parity_service.solve_ufix(arena, lmax, parity_engine)
        return f"parity/{parity_engine}", result.winner, dict(result.counts), {"parity": result}
