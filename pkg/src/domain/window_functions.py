"""Window functions: per-state vectors of worst open-window sums."""
import itertools
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, Iterator, Optional, Tuple

from src.domain.errors import ValidationError
from src.domain.models import Arena

Vector = Tuple[int, ...]


@dataclass(frozen=True)
class WindowFunction:
    """An element of the function space 𝓕.

    Only the support is stored: a state missing from `entries` maps to ⊥.
    Entry l-1 of a vector is the smallest sum of a window of length l that is
    still open at the current position, or 0 when no such window exists.
    """

    lmax: int
    entries: Tuple[Tuple[str, Vector], ...]

    @classmethod
    def of(cls, lmax: int, mapping: Dict[str, Vector]) -> "WindowFunction":
        """Build a function from a state -> vector mapping."""
        for state, vector in mapping.items():
            if len(vector) != lmax:
                raise ValidationError(
                    f"vector of {state} has length {len(vector)}, expected lmax={lmax}"
                )
        return cls(lmax, tuple(sorted((q, tuple(v)) for q, v in mapping.items())))

    @cached_property
    def table(self) -> Dict[str, Vector]:
        return dict(self.entries)

    @cached_property
    def support(self) -> FrozenSet[str]:
        return frozenset(q for q, _ in self.entries)

    @cached_property
    def suffix_minima(self) -> Dict[str, Vector]:
        return {q: suffix_min(v) for q, v in self.entries}

    @cached_property
    def is_unsafe(self) -> bool:
        """Some support state has a window of length lmax still open."""
        return any(v[-1] < 0 for _, v in self.entries)

    def value(self, state: str) -> Optional[Vector]:
        return self.table.get(state)

    def sort_key(self) -> Tuple:
        return (len(self.entries), self.entries)

    def __str__(self) -> str:
        if not self.entries:
            return "{}"
        parts = [f"{q}:({','.join(str(x) for x in v)})" for q, v in self.entries]
        return "{" + " ".join(parts) + "}"


def suffix_min(vector: Vector) -> Vector:
    """Pointwise suffix minimum: entry i is min(vector[i:])."""
    out = list(vector)
    for i in range(len(out) - 2, -1, -1):
        out[i] = min(out[i], out[i + 1])
    return tuple(out)


def leq(f: WindowFunction, g: WindowFunction) -> bool:
    """
    The order f ⪯ g on window functions.

    f ⪯ g iff supp(f) ⊆ supp(g) and for every support state q and every i
    some j ≥ i has f(q)_i ≥ g(q)_j, i.e. the suffix minima of f dominate those
    of g pointwise.

    Raises:
        ValidationError: If the functions have different lmax
    """
    if f.lmax != g.lmax:
        raise ValidationError(f"cannot compare functions of lmax {f.lmax} and {g.lmax}")
    if not f.support <= g.support:
        return False
    fs = f.suffix_minima
    gs = g.suffix_minima
    for q in f.support:
        if any(a < b for a, b in zip(fs[q], gs[q])):
            return False
    return True


def initial_function(arena: Arena, lmax: int) -> WindowFunction:
    """f_I: the zero vector at q_I, ⊥ elsewhere."""
    if lmax < 1:
        raise ValidationError("lmax must be at least 1")
    return WindowFunction.of(lmax, {arena.initial: (0,) * lmax})


def vectors(lower: int, lmax: int) -> Iterator[Vector]:
    """All vectors of length lmax over [lower, 0]."""
    return itertools.product(range(lower, 1), repeat=lmax)


def function_space(arena: Arena, lmax: int, include_empty: bool = True) -> Iterator[WindowFunction]:
    """
    Enumerate 𝓕 for an arena, in canonical order.

    Intended for exhaustive checks on small arenas only.

    Args:
        arena: The arena
        lmax: Window bound
        include_empty: Whether the all-⊥ function is produced

    Yields:
        Every function with entries in [-W*lmax, 0]
    """
    lower = -arena.max_abs_weight * lmax
    choices = [None] + list(vectors(lower, lmax))
    for combo in itertools.product(choices, repeat=len(arena.state_order)):
        mapping = {q: v for q, v in zip(arena.state_order, combo) if v is not None}
        if not mapping and not include_empty:
            continue
        yield WindowFunction.of(lmax, mapping)


def function_space_size(arena: Arena, lmax: int) -> int:
    """Exact cardinality ((W*lmax+1)^lmax + 1)^|Q| of 𝓕."""
    per_state = (arena.max_abs_weight * lmax + 1) ** lmax + 1
    return per_state ** len(arena.states)
