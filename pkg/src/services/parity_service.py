"""Parity Service: product games with parity observers and their solvers."""
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Hashable, Iterable, List, Optional, Set, Tuple

from src.domain.automata import BeliefMachine, ParityObserver
from src.domain.errors import ValidationError
from src.domain.games import ADAM, EVE, ParityGame
from src.domain.models import Arena, Winner
from src.domain.policies import check_resource_limit
from src.services.determinization import DeterminizationService
from src.services.observer_service import ObserverService

logger = logging.getLogger(__name__)

PARITY_ENGINES = ("zielonka", "spm")


@dataclass
class ParitySolution:
    """Winning regions and positional strategies of both players."""

    winner: Winner
    regions: Tuple[FrozenSet[Hashable], FrozenSet[Hashable]]
    strategies: Tuple[Dict[Hashable, Hashable], Dict[Hashable, Hashable]]


@dataclass
class ParityResult:
    """Outcome of solving Fix or UFix through an observer."""

    winner: Winner
    game: ParityGame
    solution: ParitySolution
    counts: Dict[str, int] = field(default_factory=dict)


def attractor(
    game: ParityGame,
    region: Set[Hashable],
    target: Iterable[Hashable],
    player: int,
    pred: Dict[Hashable, List[Hashable]],
) -> Tuple[Set[Hashable], Dict[Hashable, Hashable]]:
    """
    Attractor of `target` for `player` inside the subgame `region`.

    Returns:
        The attractor and, for the player's vertices added to it, the move taken
    """
    attr = set(t for t in target if t in region)
    strategy: Dict[Hashable, Hashable] = {}
    # Opponent vertices: number of successors not yet attracted
    remaining = {
        v: sum(1 for u in game.edges[v] if u in region)
        for v in region
        if game.owner[v] != player
    }
    queue = deque(attr)
    while queue:
        u = queue.popleft()
        for v in pred[u]:
            if v not in region or v in attr:
                continue
            if game.owner[v] == player:
                attr.add(v)
                strategy[v] = u
                queue.append(v)
            else:
                remaining[v] -= 1
                if remaining[v] == 0:
                    attr.add(v)
                    queue.append(v)
    return attr, strategy


def _any_move(game: ParityGame, v: Hashable, region: Set[Hashable]) -> Hashable:
    return next(u for u in game.edges[v] if u in region)


class ParityService:
    """Service building product games and solving parity games."""

    def __init__(
        self,
        observer_service: Optional[ObserverService] = None,
        determinization: Optional[DeterminizationService] = None,
        max_states: int = 2_000_000,
    ):
        """
        Initialize the parity service.

        Args:
            observer_service: Builder of the Büchi observers
            determinization: Determinization backend
            max_states: Limit on product vertices
        """
        self.observer_service = observer_service or ObserverService(max_states=max_states)
        self.determinization = determinization or DeterminizationService()
        self.max_states = max_states

    def product_game(
        self, arena: Arena, observer: ParityObserver, with_belief: bool = False
    ) -> ParityGame:
        """
        Knowledge-based product of an arena with a deterministic observer.

        Eve vertices (s, d) take the observer priority of d. Eve chooses σ and
        moves to the Adam vertex (s, d, σ); Adam reveals a block o with
        post_σ(s) ∩ o ≠ ∅ and the play moves to (post_σ(s) ∩ o, δ(d, letter)).
        The letter is (σ, o), or (σ, o, s′) with the new belief when `with_belief`.

        Args:
            arena: The arena
            observer: Deterministic max-parity observer over the matching letters
            with_belief: Feed belief-annotated letters

        Returns:
            The reachable part of the product

        Raises:
            ResourceLimitError: If more than max_states vertices are reached
        """
        machine = BeliefMachine(arena)
        start = (machine.initial, observer.initial)
        game = ParityGame(initial=start)
        game.add_vertex(start, EVE, observer.priority(observer.initial))
        queue = deque([start])
        while queue:
            v = queue.popleft()
            if game.owner[v] == EVE:
                belief, d = v
                succ = []
                for action in arena.action_order:
                    u = (belief, d, action)
                    if u not in game.owner:
                        game.add_vertex(u, ADAM, 0)
                        queue.append(u)
                    succ.append(u)
                game.edges[v] = tuple(succ)
            else:
                belief, d, action = v
                succ = []
                for block, nxt in machine.moves(belief, action):
                    letter = (action, block, nxt) if with_belief else (action, block)
                    d2 = observer.step(d, letter)
                    u = (nxt, d2)
                    if u not in game.owner:
                        game.add_vertex(u, EVE, observer.priority(d2))
                        queue.append(u)
                    succ.append(u)
                game.edges[v] = tuple(succ)
            check_resource_limit(len(game.vertices), self.max_states, "product game")
        return game

    def solve_parity(self, game: ParityGame, engine: str = "zielonka") -> ParitySolution:
        """
        Solve a max-parity game.

        Args:
            game: Parity game with a successor at every vertex
            engine: "zielonka" (recursive) or "spm" (small progress measures)

        Returns:
            Winning regions and positional winning strategies of both players

        Raises:
            ValidationError: On an unknown engine or a vertex without successor
        """
        game.validate()
        if engine == "zielonka":
            regions, strategies = self._zielonka(game, set(game.vertices), game.predecessors())
        elif engine == "spm":
            regions, strategies = self._spm_both(game)
        else:
            raise ValidationError(f"unknown parity engine '{engine}'")
        winner = Winner.EVE if game.initial in regions[EVE] else Winner.ADAM
        return ParitySolution(
            winner=winner,
            regions=(frozenset(regions[EVE]), frozenset(regions[ADAM])),
            strategies=(strategies[EVE], strategies[ADAM]),
        )

    def _zielonka(self, game: ParityGame, region: Set[Hashable], pred):
        if not region:
            return (set(), set()), ({}, {})
        top = max(game.priority[v] for v in region)
        player = top % 2
        opponent = 1 - player
        peak = {v for v in region if game.priority[v] == top}
        attr, attr_strategy = attractor(game, region, peak, player, pred)
        sub_regions, sub_strategies = self._zielonka(game, region - attr, pred)

        if not sub_regions[opponent]:
            strategy = dict(sub_strategies[player])
            strategy.update(attr_strategy)
            for v in peak:
                if game.owner[v] == player:
                    strategy[v] = _any_move(game, v, region)
            regions = [set(), set()]
            regions[player] = set(region)
            strategies = [{}, {}]
            strategies[player] = strategy
            return tuple(regions), tuple(strategies)

        back, back_strategy = attractor(game, region, sub_regions[opponent], opponent, pred)
        rest_regions, rest_strategies = self._zielonka(game, region - back, pred)
        opponent_strategy = dict(rest_strategies[opponent])
        opponent_strategy.update(sub_strategies[opponent])
        opponent_strategy.update(back_strategy)
        regions = [set(), set()]
        regions[player] = rest_regions[player]
        regions[opponent] = rest_regions[opponent] | back
        strategies = [{}, {}]
        strategies[player] = rest_strategies[player]
        strategies[opponent] = opponent_strategy
        return tuple(regions), tuple(strategies)

    def _spm_both(self, game: ParityGame):
        """Progress measures for Eve, and for Adam on the dual game."""
        top = game.max_priority + (game.max_priority % 2)
        # Max-parity to min-parity keeps parities when subtracting from an even top
        eve_win, eve_strategy = self._spm(game, {v: top - p for v, p in game.priority.items()}, EVE)
        adam_win, adam_strategy = self._spm(
            game, {v: top - p + 1 for v, p in game.priority.items()}, ADAM
        )
        return (eve_win, adam_win), (eve_strategy, adam_strategy)

    def _spm(self, game: ParityGame, priority: Dict[Hashable, int], player: int):
        """
        Jurdziński's small progress measures on a min-parity game, for `player` as the even player.

        Returns:
            The player's winning region and a positional strategy on it
        """
        top = max(priority.values())
        odd = list(range(1, top + 1, 2))
        bounds = [sum(1 for p in priority.values() if p == i) for i in odd]
        width = len(odd)
        zero = (0,) * width
        rho: Dict[Hashable, Optional[Tuple[int, ...]]] = {v: zero for v in game.vertices}
        pred = game.predecessors()

        def prog(v: Hashable, u: Hashable) -> Optional[Tuple[int, ...]]:
            m = rho[u]
            if m is None:
                return None
            p = priority[v]
            k = (p + 1) // 2
            head = list(m[:k])
            if p % 2 == 1:
                pos = k - 1
                while pos >= 0:
                    if head[pos] < bounds[pos]:
                        head[pos] += 1
                        break
                    head[pos] = 0
                    pos -= 1
                if pos < 0:
                    return None
            return tuple(head) + (0,) * (width - k)

        def better(a, b) -> bool:
            """a < b with None as top."""
            if a is None:
                return False
            return b is None or a < b

        def lift(v: Hashable) -> Optional[Tuple[int, ...]]:
            values = [prog(v, u) for u in game.edges[v]]
            if game.owner[v] == player:
                best = values[0]
                for value in values[1:]:
                    if better(value, best):
                        best = value
            else:
                best = values[0]
                for value in values[1:]:
                    if better(best, value):
                        best = value
            return best

        queue = deque(game.vertices)
        queued = set(game.vertices)
        while queue:
            v = queue.popleft()
            queued.discard(v)
            if rho[v] is None:
                continue
            value = lift(v)
            if better(rho[v], value):
                rho[v] = value
                for u in pred[v]:
                    if u not in queued and rho[u] is not None:
                        queued.add(u)
                        queue.append(u)

        winning = {v for v in game.vertices if rho[v] is not None}
        strategy = {}
        for v in winning:
            if game.owner[v] != player:
                continue
            best_move, best = None, None
            for u in game.edges[v]:
                value = prog(v, u)
                if value is not None and (best_move is None or better(value, best)):
                    best_move, best = u, value
            strategy[v] = best_move
        return winning, strategy

    def solve_fix(self, arena: Arena, lmax: int, engine: str = "zielonka") -> ParityResult:
        """
        Decide Fix(lmax) through the complemented determinized observer of its violations.

        Args:
            arena: The arena (threshold already normalized)
            lmax: Window bound
            engine: Parity engine

        Returns:
            Winner, the product game, its solution and construction counts
        """
        nba = self.observer_service.build_fix_nba(arena, lmax)
        return self._solve_through(arena, nba, engine, with_belief=False)

    def solve_ufix(self, arena: Arena, lmax: int, engine: str = "zielonka") -> ParityResult:
        """Decide UFix(lmax) through the belief-annotated observer of its violations."""
        nba = self.observer_service.build_ufix_nba(arena, lmax)
        return self._solve_through(arena, nba, engine, with_belief=True)

    def _solve_through(self, arena: Arena, nba, engine: str, with_belief: bool) -> ParityResult:
        det = self.determinization.determinize(nba)
        observer = self.determinization.complement(det)
        game = self.product_game(arena, observer, with_belief=with_belief)
        solution = self.solve_parity(game, engine)
        counts = {
            "nbaStates": nba.state_bound,
            "parityStates": observer.materialized_states,
            "gameVertices": len(game.vertices),
            "maxPriority": game.max_priority,
        }
        logger.debug("%s: %s %s", nba.name, solution.winner.value, counts)
        return ParityResult(winner=solution.winner, game=game, solution=solution, counts=counts)
