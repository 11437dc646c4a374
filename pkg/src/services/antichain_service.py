"""Antichain Service: symbolic DirFix solving over ⪯-minimal window functions."""
import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Set, Tuple

from src.domain.models import Arena, Winner
from src.domain.policies import check_resource_limit
from src.domain.window_functions import (
    WindowFunction,
    function_space,
    function_space_size,
    initial_function,
    leq,
)
from src.services.dirfix_service import DirfixService

logger = logging.getLogger(__name__)

# An atomic requirement on a predecessor p: p in the support, and optionally
# entry j of p's vector at most theta
Atom = Tuple[str, Optional[int], int]


def _atom_key(atom: Atom) -> Tuple:
    p, j, theta = atom
    return (p, -1 if j is None else j, theta)


@dataclass(frozen=True)
class Antichain:
    """A set of pairwise ⪯-incomparable window functions, in canonical order.

    The empty antichain stands for the empty upward-closed set.
    """

    elements: Tuple[WindowFunction, ...] = ()

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def covers(self, f: WindowFunction) -> bool:
        """Whether f lies in the upward closure."""
        return any(leq(y, f) for y in self.elements)


@dataclass
class AntichainResult:
    """Outcome of the antichain fixpoint."""

    winner: Winner
    fixpoint: Antichain
    iteration_sizes: List[int] = field(default_factory=list)
    stopped_early: bool = False


def lub(f: WindowFunction, g: WindowFunction) -> WindowFunction:
    """Least upper bound for ⪯: union of supports, pointwise minimum of suffix minima."""
    fs = f.suffix_minima
    gs = g.suffix_minima
    mapping = {}
    for q in f.support | g.support:
        if q in fs and q in gs:
            mapping[q] = tuple(min(a, b) for a, b in zip(fs[q], gs[q]))
        else:
            mapping[q] = fs[q] if q in fs else gs[q]
    return WindowFunction.of(f.lmax, mapping)


class AntichainService:
    """Service for the antichain algebra and the symbolic fixpoint."""

    def __init__(
        self,
        dirfix_service: Optional[DirfixService] = None,
        max_states: int = 2_000_000,
        explicit_upre: bool = False,
    ):
        """
        Initialize the antichain service.

        Args:
            dirfix_service: Provider of σ-successors for the explicit operators
            max_states: Limit on antichain sizes and enumerated function spaces
            explicit_upre: Compute ⌊upre⌋ by filtering upre_explicit (small arenas only)
        """
        self.dirfix_service = dirfix_service or DirfixService(max_states=max_states)
        self.max_states = max_states
        self.explicit_upre = explicit_upre

    @staticmethod
    def leq(f: WindowFunction, g: WindowFunction) -> bool:
        return leq(f, g)

    def minimal(self, functions: Iterable[WindowFunction]) -> Antichain:
        """
        ⌊S⌋: the ⪯-minimal elements, one representative per equivalence class.

        Args:
            functions: Any collection of functions of the same lmax

        Returns:
            Antichain whose upward closure equals that of the input
        """
        kept: List[WindowFunction] = []
        for x in sorted(set(functions), key=WindowFunction.sort_key):
            if any(leq(y, x) for y in kept):
                continue
            kept = [y for y in kept if not leq(x, y)]
            kept.append(x)
            check_resource_limit(len(kept), self.max_states, "antichain")
        return Antichain(tuple(sorted(kept, key=WindowFunction.sort_key)))

    @staticmethod
    def ac_leq(a: Antichain, b: Antichain) -> bool:
        """a ⊑ b: every element of b is above some element of a."""
        return all(a.covers(x) for x in b)

    def join(self, a: Antichain, b: Antichain) -> Antichain:
        """a ⊔ b = ⌊a ∪ b⌋."""
        return self.minimal(a.elements + b.elements)

    def unsafe_minimal(self, arena: Arena, lmax: int) -> Antichain:
        """
        ⌊𝒰⌋: one function per state q with support {q} and vector (0, …, 0, -1).

        Empty when every weight is 0, since 𝓕 then holds only zero vectors.
        """
        if arena.max_abs_weight == 0:
            return Antichain()
        vector = (0,) * (lmax - 1) + (-1,)
        return self.minimal(WindowFunction.of(lmax, {q: vector}) for q in arena.state_order)

    def upre_explicit(
        self, arena: Arena, lmax: int, targets: Set[WindowFunction]
    ) -> Set[WindowFunction]:
        """
        Uncontrollable predecessors by enumeration of 𝓕.

        Args:
            arena: The arena
            lmax: Window bound
            targets: Any set S of functions

        Returns:
            {p | for every σ some σ-successor of p lies in S}

        Raises:
            ResourceLimitError: If 𝓕 is larger than max_states
        """
        check_resource_limit(function_space_size(arena, lmax), self.max_states, "function space")
        result = set()
        if not targets:
            return result
        for p in function_space(arena, lmax, include_empty=False):
            if all(
                any(g in targets for _, g in self.dirfix_service.successors(arena, p, action))
                for action in arena.action_order
            ):
                result.add(p)
        return result

    def upward_closure(self, arena: Arena, a: Antichain) -> Set[WindowFunction]:
        """a↑ within 𝓕 (small arenas only)."""
        if not a.elements:
            return set()
        lmax = a.elements[0].lmax
        check_resource_limit(function_space_size(arena, lmax), self.max_states, "function space")
        return {f for f in function_space(arena, lmax) if a.covers(f)}

    def _constraints(
        self, arena: Arena, target: WindowFunction, action: str
    ) -> Optional[List[List[Atom]]]:
        """
        Conditions on p′ for some σ-successor of p′ to lie above `target`.

        Returns:
            A conjunction of disjunctions of atoms, or None if unsatisfiable
        """
        lmax = target.lmax
        lower = -arena.max_abs_weight * lmax
        conjunction: List[List[Atom]] = []
        for q, bound in sorted(target.suffix_minima.items()):
            preds = arena.predecessors(q, action)
            if not preds:
                return None
            # q must be a σ-successor of the support
            conjunction.append(sorted({(p, None, 0) for p, _ in preds}))
            for i, c in enumerate(bound):
                if c >= 0:
                    continue
                options = set()
                for p, w in preds:
                    if i == 0 and w <= c:
                        options.add((p, None, 0))
                    theta = min(c - w, -1)
                    if theta < lower:
                        continue
                    # an open window of length k >= max(i+1, 2) ending in q extends entry k-2 of p
                    for j in range(max(i - 1, 0), lmax - 1):
                        options.add((p, j, theta))
                if not options:
                    return None
                conjunction.append(sorted(options, key=_atom_key))
        return conjunction

    @staticmethod
    def _atom_function(atom: Atom, lmax: int) -> WindowFunction:
        p, j, theta = atom
        if j is None:
            return WindowFunction.of(lmax, {p: (0,) * lmax})
        vector = tuple(theta if k <= j else 0 for k in range(lmax))
        return WindowFunction.of(lmax, {p: vector})

    def _single_block(self, arena: Arena, f: WindowFunction) -> bool:
        return len({arena.block_of(q) for q in f.support}) <= 1

    def _predecessors_of(
        self, arena: Arena, target: WindowFunction, action: str, observable_only: bool
    ) -> List[WindowFunction]:
        """⌊{p′ | some σ-successor of p′ is above target}⌋, one constraint at a time."""
        blocks = {arena.block_of(q) for q in target.support}
        if len(blocks) != 1:
            return []
        conjunction = self._constraints(arena, target, action)
        if conjunction is None:
            return []
        lmax = target.lmax
        partial = [WindowFunction.of(lmax, {})]
        for disjunction in conjunction:
            atoms = [self._atom_function(atom, lmax) for atom in disjunction]
            grown = [lub(c, x) for c in partial for x in atoms]
            if observable_only:
                grown = [g for g in grown if self._single_block(arena, g)]
            partial = list(self.minimal(grown))
            if not partial:
                return []
        return partial

    def ac_upre(
        self, arena: Arena, lmax: int, a: Antichain, observable_only: bool = False
    ) -> Antichain:
        """
        ⌊upre⌋(a) = ⌊upre(a↑) ∖ 𝒰⌋.

        For every element q′ of a and every σ the minimal p′ having a σ-successor
        above q′ are enumerated by inverting σ-successors: supports first, then
        the least value vectors meeting the window bounds of q′. Per-σ sets are
        combined by least upper bounds.

        Args:
            arena: The arena
            lmax: Window bound
            a: Antichain
            observable_only: Keep only functions whose support lies in one observation block

        Returns:
            The antichain of minimal safe uncontrollable predecessors
        """
        if self.explicit_upre:
            closure = self.upward_closure(arena, a)
            pre = self.upre_explicit(arena, lmax, closure)
            safe = [f for f in pre if not f.is_unsafe]
            if observable_only:
                safe = [f for f in safe if self._single_block(arena, f)]
            return self.minimal(safe)

        if not a.elements:
            return Antichain()
        combined: Optional[List[WindowFunction]] = None
        for action in arena.action_order:
            per_action: List[WindowFunction] = []
            for target in a:
                per_action.extend(self._predecessors_of(arena, target, action, observable_only))
            layer = list(self.minimal(per_action))
            if combined is None:
                combined = layer
            else:
                merged = [lub(x, y) for x in combined for y in layer]
                if observable_only:
                    merged = [g for g in merged if self._single_block(arena, g)]
                combined = list(self.minimal(merged))
            if not combined:
                return Antichain()
        return self.minimal(f for f in combined if not f.is_unsafe)

    def solve_dirfix_antichain(self, arena: Arena, lmax: int) -> AntichainResult:
        """
        Decide DirFix(lmax) with the least fixpoint of X ↦ ⌊𝒰⌋ ⊔ ⌊upre⌋(X).

        Eve wins iff no element of the fixpoint lies below f_I. Iteration stops
        early once such an element appears.

        Args:
            arena: The arena (threshold already normalized)
            lmax: Window bound

        Returns:
            Winner, the (possibly partial) fixpoint and per-iteration antichain sizes
        """
        f_init = initial_function(arena, lmax)
        frontier = self.unsafe_minimal(arena, lmax)
        sizes = [len(frontier)]
        while True:
            if frontier.covers(f_init):
                logger.debug("antichain: f_I dominated after %d iterations", len(sizes))
                return AntichainResult(Winner.ADAM, frontier, sizes, stopped_early=True)
            nxt = self.join(frontier, self.ac_upre(arena, lmax, frontier, observable_only=True))
            sizes.append(len(nxt))
            if self.ac_leq(frontier, nxt) and self.ac_leq(nxt, frontier):
                logger.debug(
                    "antichain: fixpoint after %d iterations, %d elements", len(sizes), len(nxt)
                )
                return AntichainResult(Winner.EVE, nxt, sizes)
            frontier = nxt
