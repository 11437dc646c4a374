"""Arena Service for parsing, rescaling and path semantics."""
import logging
from fractions import Fraction
from pathlib import Path
from typing import FrozenSet, Iterable, List

from src.domain.errors import LassoError, NotFoundError, RangeError, ValidationError
from src.domain.models import AbstractLasso, AbstractPath, Arena, ConcretePath, Transition
from src.infra.formats.wga_codec import canonical_arena, parse_arena, serialize_arena

logger = logging.getLogger(__name__)

# Weights are kept within signed 64-bit range
WEIGHT_LIMIT = 2**63 - 1


class ArenaService:
    """Service for arena construction and path arithmetic."""

    def parse_arena(self, text: str) -> Arena:
        """
        Parse `.wga` text into an arena.

        Args:
            text: File content

        Returns:
            Validated arena

        Raises:
            ParseError: On syntax errors
            ValidationError: On invariant violations
        """
        arena = parse_arena(text)
        logger.debug(
            "parsed arena: %d states, %d actions, %d blocks, W=%d",
            len(arena.states),
            len(arena.alphabet),
            len(arena.blocks),
            arena.max_abs_weight,
        )
        return arena

    def serialize_arena(self, arena: Arena) -> str:
        return serialize_arena(arena)

    def load(self, path: Path | str) -> Arena:
        """Read and parse a `.wga` file."""
        path = Path(path)
        if not path.exists():
            raise NotFoundError(f"arena file not found: {path}")
        return self.parse_arena(path.read_text(encoding="utf-8"))

    def rescale(self, arena: Arena, numerator: int, denominator: int = 1) -> Arena:
        """
        Shift the threshold ν = a/b to 0 by mapping every weight w to b·w − a.

        Args:
            arena: The arena
            numerator: a
            denominator: b (>= 1)

        Returns:
            Arena with rescaled weights; all other fields unchanged

        Raises:
            ValidationError: If b < 1
            RangeError: If b·W + |a| leaves the 64-bit range
        """
        if denominator < 1:
            raise ValidationError("threshold denominator must be at least 1")
        if denominator * arena.max_abs_weight + abs(numerator) > WEIGHT_LIMIT:
            raise RangeError(
                f"rescaling by {numerator}/{denominator} overflows 64-bit weights"
            )
        if numerator == 0 and denominator == 1:
            return arena
        transitions = [
            Transition(
                source=t.source,
                action=t.action,
                weight=denominator * t.weight - numerator,
                target=t.target,
            )
            for t in arena.transitions
        ]
        return canonical_arena(
            arena.states,
            arena.initial,
            arena.alphabet,
            transitions,
            arena.observations,
            arena.weightScale,
        )

    def post(self, arena: Arena, source: Iterable[str], action: str) -> FrozenSet[str]:
        """
        σ-successors of a set of states.

        Raises:
            NotFoundError: If the action or a state is unknown
        """
        if action not in arena.alphabet:
            raise NotFoundError(f"unknown action '{action}'")
        source = frozenset(source)
        unknown = source - set(arena.states)
        if unknown:
            raise NotFoundError(f"unknown states {sorted(unknown)}")
        return arena.post(source, action)

    def payoff(self, arena: Arena, path: ConcretePath, n: int) -> int:
        """
        Sum of the first n transition weights of a path.

        Args:
            arena: The arena the path lives in
            path: Concrete path (lassos are unrolled)
            n: Number of transitions

        Returns:
            Σ_{i<n} w(q_i, σ_i, q_{i+1})

        Raises:
            RangeError: If n is negative or beyond a finite path
        """
        if n < 0 or (not path.is_lasso and n > path.transition_count()):
            raise RangeError(
                f"index {n} out of range for a path of {path.transition_count()} steps"
            )
        total = 0
        for i in range(n):
            q, a, q2 = path.step(i)
            total += arena.weight(q, a, q2)
        return total

    def mean_payoff_of_lasso(self, arena: Arena, path: ConcretePath) -> Fraction:
        """
        Mean payoff of an ultimately periodic path: the average weight of its cycle.

        Raises:
            ValidationError: If the path has no cycle
        """
        if not path.is_lasso:
            raise ValidationError("mean payoff needs an ultimately periodic path")
        start = path.cycleStart
        weights = [
            arena.weight(path.states[i], path.actions[i], path.states[i + 1])
            for i in range(start, path.transition_count())
        ]
        return Fraction(sum(weights), len(weights))

    def concretizations(self, arena: Arena, abstract: AbstractPath) -> List[ConcretePath]:
        """
        All concrete paths agreeing with an abstract prefix.

        The result can be exponential in the prefix length.

        Args:
            arena: The arena
            abstract: Abstract prefix o₀σ₀…o_n

        Returns:
            Concrete prefixes in canonical order; empty when the prefix is illegal
        """
        for action in abstract.actions:
            if action not in arena.alphabet:
                raise NotFoundError(f"unknown action '{action}'")
        if arena.initial not in abstract.observations[0]:
            return []
        partial: List[List[str]] = [[arena.initial]]
        for action, observation in zip(abstract.actions, abstract.observations[1:]):
            extended = []
            for states in partial:
                for q2, _ in arena.successors(states[-1], action):
                    if q2 in observation:
                        extended.append(states + [q2])
            partial = extended
            if not partial:
                break
        return [
            ConcretePath(states=tuple(states), actions=abstract.actions)
            for states in sorted(partial)
        ]

    def validate_lasso(self, arena: Arena, lasso: AbstractLasso) -> None:
        """
        Check that a lasso is a play of the arena.

        Runs the knowledge sets along the lasso until (position, knowledge)
        repeats; every prefix has a concretization iff no set becomes empty.

        Raises:
            LassoError: If the first observation is not q_I's block or some prefix is infeasible
        """
        steps = lasso.block_indices(arena)
        if steps[0][0] != arena.block_of(arena.initial):
            raise LassoError("lasso must start in the observation of the initial state")
        knowledge = frozenset({arena.initial})
        seen = set()
        t = 0
        while (t, knowledge) not in seen:
            seen.add((t, knowledge))
            nxt = lasso.next_position(t)
            knowledge = arena.post(knowledge, steps[t][1]) & arena.blocks[steps[nxt][0]]
            if not knowledge:
                raise LassoError(f"lasso has no concretization beyond position {t}")
            t = nxt
