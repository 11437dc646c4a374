"""Observer Service: Büchi observers for the complements of Fix and UFix."""
import logging
from typing import Iterator, Optional, Tuple

import networkx as nx

from src.domain.automata import BeliefMachine, BuchiObserver, LassoWord
from src.domain.errors import ValidationError
from src.domain.models import AbstractLasso, Arena
from src.services.arena_service import ArenaService

logger = logging.getLogger(__name__)

# Marker for a completed violation in the UFix observer
TOP = "top"

FixState = Tuple[str, int, Optional[int]]
UfixState = Tuple[str, str, int, object]


class ObserverService:
    """Service building and running the window observers."""

    def __init__(self, arena_service: Optional[ArenaService] = None, max_states: int = 2_000_000):
        """Initialize the observer service."""
        self.arena_service = arena_service or ArenaService()
        self.max_states = max_states

    def build_fix_nba(self, arena: Arena, lmax: int) -> BuchiObserver:
        """
        Büchi observer accepting the plays that violate Fix(lmax).

        States are (q, i, n): the run follows a concrete path and n is the sum
        of the window of length i opened at the last guessed position, or ⊥
        (None). Letters are (σ, o) with o the block of the next state.

        Args:
            arena: The arena (threshold already normalized)
            lmax: Window bound

        Returns:
            Observer whose accepting states are those with i = lmax and n ≠ ⊥
        """
        if lmax < 1:
            raise ValidationError("lmax must be at least 1")
        block_of = arena.block_of

        def rule(state: FixState, letter: Tuple[str, int]) -> Iterator[FixState]:
            p, i, n = state
            action, block = letter
            for q, w in arena.successors(p, action):
                if block_of(q) != block:
                    continue
                fired = False
                if w < 0:
                    fired = True
                    yield (q, 1, w)
                if n is not None and n + w < 0 and i < lmax:
                    fired = True
                    yield (q, i + 1, n + w)
                if not fired:
                    yield (q, 1, None)

        letters = tuple(
            (a, b) for a in arena.action_order for b in range(len(arena.blocks))
        )
        return BuchiObserver(
            name=f"fix-nba(lmax={lmax})",
            initial=(arena.initial, 1, None),
            alphabet=letters,
            rule=rule,
            accepting=lambda s: s[1] == lmax and s[2] is not None,
            max_states=self.max_states,
        )

    def build_belief_machine(self, arena: Arena) -> BeliefMachine:
        return BeliefMachine(arena)

    def build_ufix_nba(self, arena: Arena, lmax: int) -> BuchiObserver:
        """
        Büchi observer accepting the belief-annotated plays that violate UFix(lmax).

        States are (q, q′, i, n). The second component is a concrete witness
        path. The first follows Δ while it keeps a window open and may restart
        (n = ⊥) anywhere in the belief. Once the window has stayed open for
        lmax steps the next step sets n = ⊤ and the first component copies the
        witness, which is the accepting merge. Letters are (σ, o, s′) with s′
        the belief after the step.

        Args:
            arena: The arena (threshold already normalized)
            lmax: Window bound

        Returns:
            Observer over the reachable annotated letters
        """
        if lmax < 1:
            raise ValidationError("lmax must be at least 1")
        belief_machine = self.build_belief_machine(arena)
        block_of = arena.block_of

        def rule(state: UfixState, letter) -> Iterator[UfixState]:
            p, p2, i, n = state
            action, block, belief = letter
            witnesses = sorted(
                q2 for q2, _ in arena.successors(p2, action) if block_of(q2) == block
            )
            closing = n is not None and i == lmax and (n != TOP or p != p2)
            moves = {q: w for q, w in arena.successors(p, action)}
            for q2 in witnesses:
                # A completed violation merges into the witness path
                if closing:
                    yield (q2, q2, lmax, TOP)
                for q in sorted(belief):
                    fired = False
                    w = moves.get(q)
                    if w is not None:
                        if w < 0:
                            fired = True
                            yield (q, q2, 1, w)
                        if isinstance(n, int) and n + w < 0 and i < lmax:
                            fired = True
                            yield (q, q2, i + 1, n + w)
                    if not fired and not (closing and w is not None):
                        yield (q, q2, 1, None)

        return BuchiObserver(
            name=f"ufix-nba(lmax={lmax})",
            initial=(arena.initial, arena.initial, 1, None),
            alphabet=belief_machine.letters(),
            rule=rule,
            accepting=lambda s: s[0] == s[1] and s[3] == TOP,
            max_states=self.max_states,
        )

    def fix_word(self, arena: Arena, lasso: AbstractLasso) -> LassoWord:
        """
        The (σ_t, o_{t+1}) letters of an abstract lasso.

        Raises:
            LassoError: If the lasso is not a play of the arena
        """
        self.arena_service.validate_lasso(arena, lasso)
        steps = lasso.block_indices(arena)
        letters = [
            (steps[t][1], steps[lasso.next_position(t)][0]) for t in range(lasso.positions())
        ]
        cut = len(lasso.prefix)
        return LassoWord(prefix=tuple(letters[:cut]), cycle=tuple(letters[cut:]))

    def annotate(self, arena: Arena, lasso: AbstractLasso) -> LassoWord:
        """
        The belief-annotated letters (σ_t, o_{t+1}, s_{t+1}) of an abstract lasso.

        The belief machine runs along the lasso until (position, belief)
        repeats, which fixes the period of the annotated word.

        Raises:
            LassoError: If the lasso is not a play of the arena
        """
        self.arena_service.validate_lasso(arena, lasso)
        steps = lasso.block_indices(arena)
        machine = self.build_belief_machine(arena)
        seen = {}
        letters = []
        t, belief = 0, machine.initial
        while (t, belief) not in seen:
            seen[(t, belief)] = len(letters)
            nxt = lasso.next_position(t)
            block = steps[nxt][0]
            belief2 = machine.step(belief, steps[t][1], block)
            letters.append((steps[t][1], block, belief2))
            t, belief = nxt, belief2
        cut = seen[(t, belief)]
        return LassoWord(prefix=tuple(letters[:cut]), cycle=tuple(letters[cut:]))

    def nba_accepts_lasso(self, observer: BuchiObserver, word: LassoWord) -> bool:
        """
        Whether some run of a Büchi observer on a lasso word is accepting.

        Decided on the product of lasso positions and observer states: accepted
        iff a reachable cycle contains an accepting state.

        Raises:
            ValidationError: If the word uses a letter outside the observer's alphabet
        """
        alphabet = set(observer.alphabet)
        for letter in word.prefix + word.cycle:
            if letter not in alphabet:
                raise ValidationError(
                    f"letter {letter!r} is not in the alphabet of {observer.name}"
                )
        start = (0, observer.initial)
        graph = nx.DiGraph()
        graph.add_node(start)
        stack = [start]
        while stack:
            node = stack.pop()
            t, state = node
            nxt_t = word.next_position(t)
            for nxt_state in observer.successors(state, word.letter(t)):
                nxt = (nxt_t, nxt_state)
                if nxt not in graph:
                    graph.add_node(nxt)
                    stack.append(nxt)
                graph.add_edge(node, nxt)
        for scc in nx.strongly_connected_components(graph):
            if len(scc) == 1:
                (node,) = scc
                if not graph.has_edge(node, node):
                    continue
            if any(observer.accepting(state) for _, state in scc):
                return True
        return False
