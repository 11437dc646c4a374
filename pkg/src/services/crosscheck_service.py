"""Crosscheck Service: differential testing of the engines on seeded random arenas."""
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Optional, Tuple

from src.config import CrosscheckSettings, SolverSettings
from src.domain.errors import (
    CrosscheckError,
    LassoError,
    ResourceLimitError,
    WindowGameError,
)
from src.domain.models import AbstractLasso, Arena, Objective, ObjectiveKind, Transition, Winner
from src.infra.formats.lasso_codec import serialize_lasso
from src.infra.formats.wga_codec import canonical_arena, serialize_arena
from src.infra.storage.file_store import ArtifactStore
from src.infra.storage.paths import ArtifactPaths
from src.services.antichain_service import AntichainService
from src.services.arena_service import ArenaService
from src.services.dirfix_service import DirfixService
from src.services.observer_service import ObserverService
from src.services.oracle_service import OracleService
from src.services.parity_service import ParityService

logger = logging.getLogger(__name__)

ENGINE_CHECK = "dirfix-engines"
CHAIN_CHECK = "implication-chain"
LASSO_CHAIN_CHECK = "lasso-chain"
FIX_OBSERVER_CHECK = "fix-observer"
UFIX_OBSERVER_CHECK = "ufix-observer"
CHECKS = (ENGINE_CHECK, CHAIN_CHECK, LASSO_CHAIN_CHECK, FIX_OBSERVER_CHECK, UFIX_OBSERVER_CHECK)

# Probability of a blind arena when more than one state is drawn
BLIND_RATE = 0.3


@dataclass
class CrosscheckCase:
    """One generated instance: an arena, a window bound and some legal lassos."""

    index: int
    arena: Arena
    lmax: int
    lassos: List[AbstractLasso] = field(default_factory=list)


@dataclass
class CheckFailure:
    """A disagreement found on one case."""

    check: str
    detail: str
    lasso: Optional[AbstractLasso] = None


@dataclass
class CaseFailure:
    """A failing case after shrinking, with the path of its reproduction file."""

    case: int
    failure: CheckFailure
    arena: Arena
    lmax: int
    repro_path: Optional[Path] = None


@dataclass
class CrosscheckSummary:
    """Deterministic outcome of a crosscheck run."""

    seed: int
    count: int
    checked: Dict[str, int] = field(default_factory=lambda: {name: 0 for name in CHECKS})
    skipped: Dict[str, int] = field(default_factory=lambda: {name: 0 for name in CHECKS})
    failures: List[CaseFailure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def render(self) -> str:
        """Plain-text summary; identical seeds and settings give identical text."""
        lines = [f"crosscheck seed={self.seed} cases={self.count}"]
        failed: Dict[str, int] = {name: 0 for name in CHECKS}
        for f in self.failures:
            failed[f.failure.check] += 1
        for name in CHECKS:
            line = f"  {name:<18} checked={self.checked[name]} failed={failed[name]}"
            if self.skipped[name]:
                line += f" skipped={self.skipped[name]}"
            lines.append(line)
        for f in self.failures:
            line = f"case {f.case}: {f.failure.check}: {f.failure.detail}"
            if f.repro_path is not None:
                line += f" (repro {f.repro_path.as_posix()})"
            lines.append(line)
        lines.append("result: " + ("pass" if self.passed else "FAIL"))
        return "\n".join(lines) + "\n"

    def raise_for_failures(self) -> None:
        """
        Raise if any check failed.

        Raises:
            CrosscheckError: Naming the first failing case
        """
        if self.failures:
            first = self.failures[0]
            raise CrosscheckError(
                f"{len(self.failures)} mismatch(es); first in case {first.case}: "
                f"{first.failure.check}: {first.failure.detail}"
            )


class CrosscheckService:
    """Service comparing the explicit, antichain, observer and oracle verdicts."""

    def __init__(
        self,
        settings: Optional[CrosscheckSettings] = None,
        solver_settings: Optional[SolverSettings] = None,
        dirfix_service: Optional[DirfixService] = None,
        store: Optional[ArtifactStore] = None,
        repro_dir: Optional[Path] = None,
        solve_parity: bool = True,
    ):
        """
        Initialize the crosscheck service.

        Args:
            settings: Bounds of the generated instances
            solver_settings: Resource guard shared by every engine
            dirfix_service: Explicit DirFix engine under test; the antichain engine
                        always gets its own instance
            store: Artifact store for reproduction files
            repro_dir: Where reproductions go; None disables writing them
            solve_parity: Whether to run the Fix/UFix parity pipelines for the
                        implication chain
        """
        self.settings = settings or CrosscheckSettings()
        limit = (solver_settings or SolverSettings()).maxStates
        self.arena_service = ArenaService()
        self.dirfix_service = dirfix_service or DirfixService(max_states=limit)
        self.antichain_service = AntichainService(DirfixService(max_states=limit), max_states=limit)
        self.observer_service = ObserverService(self.arena_service, max_states=limit)
        self.parity_service = ParityService(self.observer_service, max_states=limit)
        self.oracle_service = OracleService(self.arena_service)
        self.store = store or ArtifactStore()
        self.repro_dir = repro_dir
        self.solve_parity = solve_parity

    # ----- generation -------------------------------------------------

    def random_arena(self, rng: random.Random) -> Arena:
        """
        Draw an arena within the configured bounds.

        The initial state is alone in its block, or the arena is blind.

        Args:
            rng: Seeded generator

        Returns:
            A valid arena
        """
        s = self.settings
        n = rng.randint(1, s.maxStates)
        states = [f"q{i}" for i in range(n)]
        actions = [chr(ord("a") + i) for i in range(rng.randint(1, s.maxActions))]
        transitions = []
        for q in states:
            for a in actions:
                for target in rng.sample(states, rng.randint(1, min(2, n))):
                    weight = rng.randint(-s.maxWeight, s.maxWeight)
                    transitions.append(Transition(source=q, action=a, weight=weight, target=target))

        if n == 1 or rng.random() < BLIND_RATE:
            blocks = [set(states)]
        else:
            groups: Dict[int, set] = {}
            for q in states[1:]:
                groups.setdefault(rng.randint(0, n - 2), set()).add(q)
            blocks = [{states[0]}] + [groups[k] for k in sorted(groups)]
        return canonical_arena(states, states[0], actions, transitions, blocks)

    def random_lasso(self, rng: random.Random, arena: Arena) -> Optional[AbstractLasso]:
        """
        Draw an abstract lasso by a random walk over knowledge sets.

        Returns:
            A legal lasso, or None when the drawn cut is not a play
        """
        length = rng.randint(1, self.settings.maxLassoLength)
        knowledge = frozenset({arena.initial})
        block = arena.block_of(arena.initial)
        steps = []
        for _ in range(length):
            action = rng.choice(arena.action_order)
            steps.append((arena.blocks[block], action))
            post = arena.post(knowledge, action)
            options = [i for i, o in enumerate(arena.blocks) if post & o]
            block = rng.choice(options)
            knowledge = post & arena.blocks[block]
        cut = rng.randrange(length)
        lasso = AbstractLasso(prefix=tuple(steps[:cut]), cycle=tuple(steps[cut:]))
        try:
            self.arena_service.validate_lasso(arena, lasso)
        except LassoError:
            return None
        return lasso

    def generate_cases(self, seed: int, count: int) -> Iterator[CrosscheckCase]:
        """Yield `count` cases drawn from one random.Random(seed)."""
        rng = random.Random(seed)
        for index in range(count):
            arena = self.random_arena(rng)
            lmax = rng.randint(1, self.settings.maxLmax)
            lassos = []
            for _ in range(self.settings.lassosPerArena):
                lasso = self.random_lasso(rng, arena)
                if lasso is not None and lasso not in lassos:
                    lassos.append(lasso)
            yield CrosscheckCase(index=index, arena=arena, lmax=lmax, lassos=lassos)

    # ----- checks -----------------------------------------------------

    def check_case(
        self,
        arena: Arena,
        lmax: int,
        lassos: List[AbstractLasso],
        summary: Optional[CrosscheckSummary] = None,
    ) -> List[CheckFailure]:
        """
        Run every check on one instance.

        Args:
            arena: The arena
            lmax: Window bound
            lassos: Legal lassos for the lasso-level checks
            summary: Optional summary whose counters are updated

        Returns:
            Failures found, in check order
        """
        failures: List[CheckFailure] = []

        def tally(name: str, skipped: bool = False) -> None:
            if summary is not None:
                (summary.skipped if skipped else summary.checked)[name] += 1

        explicit = self.dirfix_service.solve_dirfix(arena, lmax).winner
        symbolic = self.antichain_service.solve_dirfix_antichain(arena, lmax).winner
        tally(ENGINE_CHECK)
        if explicit != symbolic:
            failures.append(
                CheckFailure(
                    ENGINE_CHECK,
                    f"explicit={explicit.value} antichain={symbolic.value} lmax={lmax}",
                )
            )

        if self.solve_parity:
            try:
                ufix = self.parity_service.solve_ufix(arena, lmax).winner
                fix = self.parity_service.solve_fix(arena, lmax).winner
            except ResourceLimitError as e:
                logger.debug("implication chain skipped: %s", e)
                tally(CHAIN_CHECK, skipped=True)
            else:
                tally(CHAIN_CHECK)
                chain = [explicit, ufix, fix]
                if not self._monotone(chain):
                    failures.append(
                        CheckFailure(
                            CHAIN_CHECK,
                            "dirfix={} ufix={} fix={} lmax={}".format(
                                *(w.value for w in chain), lmax
                            ),
                        )
                    )

        if lassos:
            fix_nba = self.observer_service.build_fix_nba(arena, lmax)
            ufix_nba = self.observer_service.build_ufix_nba(arena, lmax)
        for lasso in lassos:
            verdicts = {
                kind: self.oracle_service.check_lasso(
                    arena, lasso, Objective(kind=kind, lmax=lmax)
                ).member
                for kind in (ObjectiveKind.DIRFIX, ObjectiveKind.UFIX, ObjectiveKind.FIX)
            }
            members = [
                verdicts[ObjectiveKind.DIRFIX],
                verdicts[ObjectiveKind.UFIX],
                verdicts[ObjectiveKind.FIX],
            ]
            tally(LASSO_CHAIN_CHECK)
            if any(a and not b for a, b in zip(members, members[1:])):
                failures.append(
                    CheckFailure(
                        LASSO_CHAIN_CHECK, f"membership not monotone: {members}", lasso
                    )
                )

            tally(FIX_OBSERVER_CHECK)
            violates = self.observer_service.nba_accepts_lasso(
                fix_nba, self.observer_service.fix_word(arena, lasso)
            )
            if violates == verdicts[ObjectiveKind.FIX]:
                failures.append(
                    CheckFailure(
                        FIX_OBSERVER_CHECK,
                        f"observer accepts={violates} oracle member={verdicts[ObjectiveKind.FIX]}",
                        lasso,
                    )
                )

            tally(UFIX_OBSERVER_CHECK)
            violates = self.observer_service.nba_accepts_lasso(
                ufix_nba, self.observer_service.annotate(arena, lasso)
            )
            if violates == verdicts[ObjectiveKind.UFIX]:
                failures.append(
                    CheckFailure(
                        UFIX_OBSERVER_CHECK,
                        f"observer accepts={violates} oracle member={verdicts[ObjectiveKind.UFIX]}",
                        lasso,
                    )
                )
        return failures

    @staticmethod
    def _monotone(winners: List[Winner]) -> bool:
        """Eve winning a stronger objective implies Eve winning every weaker one."""
        return all(
            not (a == Winner.EVE and b == Winner.ADAM) for a, b in zip(winners, winners[1:])
        )

    # ----- shrinking --------------------------------------------------

    def shrink(
        self, arena: Arena, lmax: int, still_fails: Callable[[Arena, int], bool]
    ) -> Tuple[Arena, int]:
        """
        Greedily simplify a failing instance while it keeps failing.

        Moves, tried in order until none applies: lower lmax, drop a state no
        other state reaches, drop an action, drop one of several σ-successors,
        move a weight one step toward 0.

        Args:
            arena: Failing arena
            lmax: Failing window bound
            still_fails: Predicate re-running the failing check

        Returns:
            (arena, lmax) of the smallest failing instance found
        """
        improved = True
        while improved:
            improved = False
            for candidate, bound in self._shrink_moves(arena, lmax):
                try:
                    fails = still_fails(candidate, bound)
                except WindowGameError:
                    fails = False
                if fails:
                    arena, lmax = candidate, bound
                    improved = True
                    break
        return arena, lmax

    def _shrink_moves(self, arena: Arena, lmax: int) -> Iterator[Tuple[Arena, int]]:
        if lmax > 1:
            yield arena, lmax - 1
        transitions = list(arena.transitions)
        blocks = [set(b) for b in arena.blocks]

        for q in arena.state_order:
            if q == arena.initial:
                continue
            if any(t.target == q and t.source != q for t in transitions):
                continue
            kept = [t for t in transitions if t.source != q]
            reduced = [b - {q} for b in blocks if b - {q}]
            candidate = self._rebuild(arena, set(arena.states) - {q}, arena.alphabet, kept, reduced)
            if candidate is not None:
                yield candidate, lmax

        if len(arena.alphabet) > 1:
            for a in arena.action_order:
                kept = [t for t in transitions if t.action != a]
                alphabet = [b for b in arena.alphabet if b != a]
                candidate = self._rebuild(arena, arena.states, alphabet, kept, blocks)
                if candidate is not None:
                    yield candidate, lmax

        for t in transitions:
            if len(arena.successors(t.source, t.action)) > 1:
                kept = [u for u in transitions if u != t]
                candidate = self._rebuild(arena, arena.states, arena.alphabet, kept, blocks)
                if candidate is not None:
                    yield candidate, lmax

        for i, t in enumerate(transitions):
            if t.weight != 0:
                step = -1 if t.weight > 0 else 1
                kept = list(transitions)
                kept[i] = t.model_copy(update={"weight": t.weight + step})
                candidate = self._rebuild(arena, arena.states, arena.alphabet, kept, blocks)
                if candidate is not None:
                    yield candidate, lmax

    @staticmethod
    def _rebuild(arena: Arena, states, alphabet, transitions, blocks) -> Optional[Arena]:
        try:
            return canonical_arena(states, arena.initial, alphabet, transitions, blocks)
        except WindowGameError:
            return None

    def _still_fails(self, failure: CheckFailure) -> Callable[[Arena, int], bool]:
        lassos = [failure.lasso] if failure.lasso is not None else []

        def predicate(arena: Arena, lmax: int) -> bool:
            for lasso in lassos:
                self.arena_service.validate_lasso(arena, lasso)
            return any(f.check == failure.check for f in self.check_case(arena, lmax, lassos))

        return predicate

    def _write_repro(self, seed: int, failure: CaseFailure) -> Path:
        path = ArtifactPaths.repro_file(self.repro_dir, seed, failure.case)
        header = [
            f"# crosscheck seed {seed}, case {failure.case}",
            f"# check: {failure.failure.check}",
            f"# detail: {failure.failure.detail}",
            f"# lmax: {failure.lmax}",
        ]
        if failure.failure.lasso is not None:
            header.append(f"# lasso: {serialize_lasso(failure.failure.lasso)}")
        content = "\n".join(header) + "\n" + serialize_arena(failure.arena)
        return self.store.write_text(path, content)

    # ----- driver -----------------------------------------------------

    def run(self, seed: Optional[int] = None, count: Optional[int] = None) -> CrosscheckSummary:
        """
        Generate and check `count` cases; shrink and save every failure.

        Args:
            seed: Seed of the run; defaults from settings
            count: Number of cases; defaults from settings

        Returns:
            The summary; call raise_for_failures() to turn mismatches into an error
        """
        seed = self.settings.seed if seed is None else seed
        count = self.settings.count if count is None else count
        summary = CrosscheckSummary(seed=seed, count=count)

        for case in self.generate_cases(seed, count):
            failures = self.check_case(case.arena, case.lmax, case.lassos, summary)
            logger.debug(
                "case %d: |Q|=%d lmax=%d lassos=%d failures=%d",
                case.index,
                len(case.arena.states),
                case.lmax,
                len(case.lassos),
                len(failures),
            )
            if not failures:
                continue
            # One reproduction per case, for its first failing check
            first = failures[0]
            arena, lmax = self.shrink(case.arena, case.lmax, self._still_fails(first))
            failure = CaseFailure(case=case.index, failure=first, arena=arena, lmax=lmax)
            if self.repro_dir is not None:
                failure.repro_path = self._write_repro(seed, failure)
            logger.warning("case %d failed %s: %s", case.index, first.check, first.detail)
            summary.failures.append(failure)

        logger.info(
            "crosscheck seed=%d: %d cases, %d failures", seed, count, len(summary.failures)
        )
        return summary
