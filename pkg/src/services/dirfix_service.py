"""DirFix Service: the safety game over window functions and strategy transfer."""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from src.domain.errors import LassoError, ValidationError
from src.domain.games import SafetyGame
from src.domain.models import AbstractPath, Arena, MooreStrategy, Winner
from src.domain.policies import check_resource_limit
from src.domain.window_functions import (
    WindowFunction,
    function_space_size,
    initial_function,
)

logger = logging.getLogger(__name__)

INITIAL_MEMORY = "init"


@dataclass(frozen=True)
class SafetySolution:
    """Winner, Eve's winning region and her positional strategy on G′."""

    winner: Winner
    winning: FrozenSet[WindowFunction]
    strategy: Dict[WindowFunction, str]


@dataclass(frozen=True)
class DirfixResult:
    """Outcome of solving DirFix on an arena."""

    winner: Winner
    strategy: Optional[MooreStrategy]
    game: SafetyGame
    solution: SafetySolution


class DirfixService:
    """Service for the explicit DirFix construction."""

    def __init__(self, max_states: int = 2_000_000):
        """
        Initialize the DirFix service.

        Args:
            max_states: Limit on materialized window functions
        """
        self.max_states = max_states

    def initial_function(self, arena: Arena, lmax: int) -> WindowFunction:
        return initial_function(arena, lmax)

    @staticmethod
    def supp(f: WindowFunction) -> FrozenSet[str]:
        return f.support

    def _zeta(
        self, f: WindowFunction, preds: Sequence[Tuple[str, int]], j: int
    ) -> Optional[int]:
        """Smallest open-window sum of length j ending with a σ-move into q; None for +∞."""
        if j == 1:
            candidates = [w for _, w in preds]
        else:
            candidates = [
                f.table[p][j - 2] + w for p, w in preds if f.table[p][j - 2] < 0
            ]
        return min(candidates) if candidates else None

    def sigma_successor(
        self, arena: Arena, f: WindowFunction, action: str, block: int
    ) -> Optional[WindowFunction]:
        """
        The σ-successor of f revealing an observation block.

        Args:
            arena: The arena
            f: Window function with non-empty support
            action: σ
            block: Index of the observation o

        Returns:
            None if post_σ(supp f) ∩ o is empty, else the successor whose entry
            j of q is ζ clamped to [-W·lmax, 0]
        """
        targets = arena.post(f.support, action) & arena.blocks[block]
        if not targets:
            return None
        lower = -arena.max_abs_weight * f.lmax
        mapping = {}
        for q in targets:
            preds = [(p, w) for p, w in arena.predecessors(q, action) if p in f.support]
            vector = []
            for j in range(1, f.lmax + 1):
                zeta = self._zeta(f, preds, j)
                vector.append(0 if zeta is None else max(lower, min(0, zeta)))
            mapping[q] = tuple(vector)
        return WindowFunction.of(f.lmax, mapping)

    def successors(
        self, arena: Arena, f: WindowFunction, action: str
    ) -> List[Tuple[int, WindowFunction]]:
        """All σ-successors of f, one per block Adam can reveal."""
        out = []
        for block in range(len(arena.blocks)):
            g = self.sigma_successor(arena, f, action, block)
            if g is not None:
                out.append((block, g))
        return out

    def supp_inverse(
        self, arena: Arena, abstract: AbstractPath, phi: WindowFunction
    ) -> List[WindowFunction]:
        """
        The function sequence induced by an abstract prefix.

        Args:
            arena: The arena
            abstract: Abstract prefix o₀σ₀…o_n
            phi: Starting function with supp(phi) ⊆ o₀

        Returns:
            [f₀ = phi, f₁, …, f_n] with f_{i+1} the σ_i-successor of f_i into o_{i+1}

        Raises:
            ValidationError: If supp(phi) is not inside the first observation
            LassoError: If some step has no successor
        """
        if not phi.support <= abstract.observations[0]:
            raise ValidationError(
                "support of the start function lies outside the first observation"
            )
        sequence = [phi]
        for i, (action, observation) in enumerate(zip(abstract.actions, abstract.observations[1:])):
            nxt = self.sigma_successor(arena, sequence[-1], action, arena.block_index(observation))
            if nxt is None:
                raise LassoError(f"illegal abstract prefix: no successor at step {i}")
            sequence.append(nxt)
        return sequence

    def build_safety_game(self, arena: Arena, lmax: int) -> SafetyGame:
        """
        Explore the safety game G′ from f_I.

        Unsafe functions (some support state with an open window of length
        lmax) are absorbing. Vertices are numbered in BFS order.

        Args:
            arena: The arena (threshold already normalized)
            lmax: Window bound

        Returns:
            The reachable part of G′

        Raises:
            ResourceLimitError: If more than max_states functions are reached
        """
        start = initial_function(arena, lmax)
        vertices = [start]
        seen = {start}
        moves: Dict[WindowFunction, Dict[str, Tuple[Tuple[int, WindowFunction], ...]]] = {}
        unsafe = set()
        layer_sizes = []
        layer = [start]
        while layer:
            layer_sizes.append(len(layer))
            next_layer = []
            for f in layer:
                if f.is_unsafe:
                    unsafe.add(f)
                    continue
                per_action = {}
                for action in arena.action_order:
                    succ = tuple(self.successors(arena, f, action))
                    per_action[action] = succ
                    for _, g in succ:
                        if g not in seen:
                            seen.add(g)
                            vertices.append(g)
                            next_layer.append(g)
                            check_resource_limit(len(seen), self.max_states, "safety game")
                moves[f] = per_action
            layer = next_layer
        game = SafetyGame(
            lmax=lmax,
            initial=start,
            vertices=tuple(vertices),
            moves=moves,
            unsafe=frozenset(unsafe),
            layer_sizes=tuple(layer_sizes),
        )
        logger.debug(
            "safety game: %d vertices, %d unsafe, %d edges",
            len(vertices),
            len(unsafe),
            game.edge_count(),
        )
        return game

    def solve_safety(self, game: SafetyGame) -> SafetySolution:
        """
        Solve G′ with the backward attractor of the unsafe vertices.

        Args:
            game: The safety game

        Returns:
            Winner from f_I, Eve's winning region and, per winning vertex, the first
            action (canonical order) all of whose successors stay winning
        """
        # For each vertex, the actions not yet known to lead into the attractor
        open_actions: Dict[WindowFunction, set] = {
            f: set(per_action) for f, per_action in game.moves.items()
        }
        back: Dict[WindowFunction, List[Tuple[WindowFunction, str]]] = {}
        for f, per_action in game.moves.items():
            for action, succ in per_action.items():
                for _, g in succ:
                    back.setdefault(g, []).append((f, action))

        attractor = set(game.unsafe)
        queue = deque(game.unsafe)
        while queue:
            g = queue.popleft()
            for f, action in back.get(g, ()):
                if f in attractor or action not in open_actions[f]:
                    continue
                open_actions[f].discard(action)
                if not open_actions[f]:
                    attractor.add(f)
                    queue.append(f)

        winning = frozenset(f for f in game.vertices if f not in attractor)
        strategy = {}
        for f in winning:
            strategy[f] = next(a for a in game.moves[f] if a in open_actions[f])
        winner = Winner.EVE if game.initial in winning else Winner.ADAM
        return SafetySolution(winner=winner, winning=winning, strategy=strategy)

    def solve_dirfix(self, arena: Arena, lmax: int) -> DirfixResult:
        """
        Decide DirFix(lmax) and extract Eve's finite-memory strategy.

        Memory is the set of winning vertices of G′ reachable under her
        positional strategy λ′, plus an initial memory. The Moore strategy plays
        λ′ of the current window function, which memory tracks.

        Args:
            arena: The arena (threshold already normalized)
            lmax: Window bound

        Returns:
            Winner, Moore strategy when Eve wins, the game and its solution
        """
        game = self.build_safety_game(arena, lmax)
        solution = self.solve_safety(game)
        strategy = None
        if solution.winner == Winner.EVE:
            strategy = self.transfer_strategy(arena, game, solution)
        logger.debug("DirFix(%d): %s", lmax, solution.winner.value)
        return DirfixResult(winner=solution.winner, strategy=strategy, game=game, solution=solution)

    def transfer_strategy(
        self, arena: Arena, game: SafetyGame, solution: SafetySolution
    ) -> MooreStrategy:
        """Read the positional strategy of G′ back as a Moore strategy of the arena."""
        lam = solution.strategy
        reachable = [game.initial]
        seen = {game.initial}
        queue = deque(reachable)
        while queue:
            f = queue.popleft()
            for _, g in game.moves[f][lam[f]]:
                if g not in seen:
                    seen.add(g)
                    reachable.append(g)
                    queue.append(g)
        reachable.sort(key=lambda f: game.index[f])

        def name(f: WindowFunction) -> str:
            return f"f{game.index[f]}"

        blocks = range(len(arena.blocks))
        update = {INITIAL_MEMORY: {o: name(game.initial) for o in blocks}}
        output = {INITIAL_MEMORY: {o: lam[game.initial] for o in blocks}}
        for f in reachable:
            update[name(f)] = {}
            output[name(f)] = {}
            for o in blocks:
                g = game.successor(f, lam[f], o)
                if g is None:
                    g = f
                update[name(f)][o] = name(g)
                output[name(f)][o] = lam[g]
        strategy = MooreStrategy(
            memory=(INITIAL_MEMORY,) + tuple(name(f) for f in reachable),
            initialMemory=INITIAL_MEMORY,
            update=update,
            output=output,
        )
        return strategy.minimize()

    def lift_strategy(self, arena: Arena, lmax: int, strategy: MooreStrategy) -> bool:
        """
        Replay a Moore strategy of the arena on G′.

        Args:
            arena: The arena
            lmax: Window bound
            strategy: Moore strategy over the arena's blocks

        Returns:
            True iff no unsafe window function is reachable under the strategy
        """
        start = (initial_function(arena, lmax), strategy.initialMemory)
        seen = {start}
        queue = deque([start])
        while queue:
            f, m = queue.popleft()
            if f.is_unsafe:
                return False
            block = arena.block_of(next(iter(f.support)))
            action = strategy.output[m][block]
            memory = strategy.update[m][block]
            for _, g in self.successors(arena, f, action):
                nxt = (g, memory)
                if nxt not in seen:
                    seen.add(nxt)
                    check_resource_limit(len(seen), self.max_states, "strategy replay")
                    queue.append(nxt)
        return True

    @staticmethod
    def function_space_bound(arena: Arena, lmax: int) -> int:
        """Number of elements of 𝓕: ((W·lmax+1)^lmax + 1)^|Q|."""
        return function_space_size(arena, lmax)
