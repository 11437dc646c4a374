"""Perfect-information games derived from arenas: the safety game G′ and parity games."""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Hashable, List, Tuple

from src.domain.errors import ValidationError
from src.domain.window_functions import WindowFunction

EVE = 0
ADAM = 1


@dataclass(frozen=True)
class SafetyGame:
    """The safety game G′ over reachable window functions.

    Unsafe vertices are absorbing and have no recorded moves. For a safe
    vertex, `moves[f][σ]` lists the σ-successors of f, one per observation
    block Adam can reveal.
    """

    lmax: int
    initial: WindowFunction
    vertices: Tuple[WindowFunction, ...]
    moves: Dict[WindowFunction, Dict[str, Tuple[Tuple[int, WindowFunction], ...]]]
    unsafe: FrozenSet[WindowFunction]
    layer_sizes: Tuple[int, ...] = ()

    @cached_property
    def index(self) -> Dict[WindowFunction, int]:
        """BFS number of each vertex."""
        return {f: i for i, f in enumerate(self.vertices)}

    def successor(self, f: WindowFunction, action: str, block: int) -> WindowFunction | None:
        """The σ-successor of f revealing a block, if it exists."""
        for b, g in self.moves.get(f, {}).get(action, ()):
            if b == block:
                return g
        return None

    def edge_count(self) -> int:
        return sum(len(succ) for per_action in self.moves.values() for succ in per_action.values())


@dataclass
class ParityGame:
    """A max-parity game of perfect information; even priorities are good for Eve."""

    initial: Hashable
    vertices: List[Hashable] = field(default_factory=list)
    owner: Dict[Hashable, int] = field(default_factory=dict)
    edges: Dict[Hashable, Tuple[Hashable, ...]] = field(default_factory=dict)
    priority: Dict[Hashable, int] = field(default_factory=dict)

    def add_vertex(self, v: Hashable, owner: int, priority: int) -> None:
        self.vertices.append(v)
        self.owner[v] = owner
        self.priority[v] = priority

    def predecessors(self) -> Dict[Hashable, List[Hashable]]:
        """Reverse adjacency over all vertices."""
        pred: Dict[Hashable, List[Hashable]] = {v: [] for v in self.vertices}
        for v in self.vertices:
            for u in self.edges[v]:
                pred[u].append(v)
        return pred

    @property
    def max_priority(self) -> int:
        return max(self.priority.values(), default=0)

    def validate(self) -> None:
        """Every vertex needs a successor inside the game."""
        known = set(self.vertices)
        for v in self.vertices:
            succ = self.edges.get(v, ())
            if not succ:
                raise ValidationError(f"vertex {v!r} has no outgoing edge")
            for u in succ:
                if u not in known:
                    raise ValidationError(f"edge {v!r} -> {u!r} leaves the game")
