"""Determinization of Büchi observers into max-parity observers with compact Safra trees."""
import logging
from typing import FrozenSet, Hashable, List, Optional, Set, Tuple

from src.domain.automata import BuchiObserver, ParityObserver

logger = logging.getLogger(__name__)

# A tree node is (name, label, children); children are ordered oldest first
Node = Tuple[int, FrozenSet[Hashable], Tuple["Node", ...]]
DetState = Tuple[Optional[Node], int]


class DeterminizationService:
    """
    Service turning a Büchi observer into an equivalent deterministic parity observer.

    States are compact Safra trees: every node carries a name in 1..n and a
    set of observer states, children labels are disjoint subsets of their
    parent's label and a node's name is smaller than the names of its
    descendants and of its younger siblings. After every step names are
    compacted to 1..k preserving their order. A state of the result is a pair
    (tree, priority of the step that produced it).
    """

    def determinize(self, nba: BuchiObserver) -> ParityObserver:
        """
        Determinize a Büchi observer.

        Args:
            nba: Nondeterministic Büchi observer

        Returns:
            Max-parity observer over the same alphabet accepting the same lasso words
        """
        bound = max(nba.state_bound, 1)

        def delta(state: DetState, letter) -> DetState:
            tree, _ = state
            return self._step(nba, tree, bound, letter)

        start = (1, frozenset({nba.initial}), ())
        initial = self._step(nba, start, bound, None)
        logger.debug("determinizing %s with n=%d", nba.name, bound)
        return ParityObserver(
            name=f"det({nba.name})",
            initial=initial,
            alphabet=nba.alphabet,
            delta=delta,
            base_priority=lambda state: state[1],
            max_states=nba.max_states,
        )

    @staticmethod
    def complement(observer: ParityObserver) -> ParityObserver:
        return observer.complement()

    def _step(
        self, nba: BuchiObserver, tree: Optional[Node], bound: int, letter
    ) -> DetState:
        """One transition of the tree automaton; letter None applies the identity."""
        sink_priority = 2 * bound + 2 - 1
        if tree is None:
            return (None, sink_priority)

        # Successors of every label
        if letter is not None:
            tree = self._post(nba, tree, letter)

        # Spawn a youngest child holding the accepting states of each node
        counter = [bound]
        tree = self._spawn(nba, tree, counter)

        # Horizontal merge: a state stays only in its oldest node
        tree = self._merge(tree, frozenset())

        removed: Set[int] = set()
        tree = self._drop_empty(tree, removed)
        if tree is None:
            return (None, sink_priority)

        # Vertical merge: a node covered by its children becomes green
        green: Set[int] = set()
        tree = self._collapse(tree, removed, green)

        old_removed = [name for name in removed if name <= bound]
        e = min(old_removed) if old_removed else None
        f = min(green) if green else None
        if f is not None and (e is None or f < e):
            min_priority = 2 * f
        elif e is not None:
            min_priority = 2 * e - 1
        else:
            min_priority = 2 * bound + 1

        names = sorted(self._names(tree))
        renaming = {old: new for new, old in enumerate(names, start=1)}
        return (self._rename(tree, renaming), 2 * bound + 2 - min_priority)

    def _post(self, nba: BuchiObserver, node: Node, letter) -> Node:
        name, label, children = node
        successors = frozenset(
            nxt for state in label for nxt in nba.successors(state, letter)
        )
        return (name, successors, tuple(self._post(nba, c, letter) for c in children))

    def _spawn(self, nba: BuchiObserver, node: Node, counter: List[int]) -> Node:
        name, label, children = node
        children = tuple(self._spawn(nba, c, counter) for c in children)
        accepting = frozenset(s for s in label if nba.accepting(s))
        if accepting:
            counter[0] += 1
            children = children + ((counter[0], accepting, ()),)
        return (name, label, children)

    def _merge(self, node: Node, forbidden: FrozenSet[Hashable]) -> Node:
        name, label, children = node
        label = label - forbidden
        taken = set(forbidden)
        merged = []
        for child in children:
            child = self._merge(child, frozenset(taken))
            taken |= child[1]
            merged.append(child)
        return (name, label, tuple(merged))

    def _drop_empty(self, node: Node, removed: Set[int]) -> Optional[Node]:
        name, label, children = node
        if not label:
            removed.update(self._names(node))
            return None
        kept = tuple(
            c for c in (self._drop_empty(c, removed) for c in children) if c is not None
        )
        return (name, label, kept)

    def _collapse(self, node: Node, removed: Set[int], green: Set[int]) -> Node:
        name, label, children = node
        if children:
            covered = frozenset().union(*(c[1] for c in children))
            if covered == label:
                for child in children:
                    removed.update(self._names(child))
                green.add(name)
                return (name, label, ())
        return (name, label, tuple(self._collapse(c, removed, green) for c in children))

    def _names(self, node: Node) -> List[int]:
        name, _, children = node
        out = [name]
        for child in children:
            out.extend(self._names(child))
        return out

    def _rename(self, node: Node, renaming) -> Node:
        name, label, children = node
        return (renaming[name], label, tuple(self._rename(c, renaming) for c in children))
