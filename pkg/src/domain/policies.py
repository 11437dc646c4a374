"""Domain policies: objective relations, decidability and resource guards."""
import logging
from typing import Dict, FrozenSet, Tuple

from src.domain.errors import ResourceLimitError, UndecidableObjectiveError
from src.domain.models import Arena, ObjectiveKind

logger = logging.getLogger(__name__)

FIXED_WINDOW_KINDS: FrozenSet[ObjectiveKind] = frozenset(
    {ObjectiveKind.DIRFIX, ObjectiveKind.UFIX, ObjectiveKind.FIX}
)
BOUNDED_WINDOW_KINDS: FrozenSet[ObjectiveKind] = frozenset(
    {ObjectiveKind.UDIRBND, ObjectiveKind.DIRBND, ObjectiveKind.UBND, ObjectiveKind.BND}
)
MEAN_PAYOFF_KINDS: FrozenSet[ObjectiveKind] = frozenset({ObjectiveKind.MPINF, ObjectiveKind.MPSUP})

# Direct implications between objectives (same lmax where one applies)
_IMPLIES: Dict[ObjectiveKind, Tuple[ObjectiveKind, ...]] = {
    ObjectiveKind.DIRFIX: (ObjectiveKind.UFIX, ObjectiveKind.UDIRBND),
    ObjectiveKind.UFIX: (ObjectiveKind.FIX, ObjectiveKind.UBND),
    ObjectiveKind.FIX: (ObjectiveKind.BND,),
    ObjectiveKind.UDIRBND: (ObjectiveKind.DIRBND, ObjectiveKind.UBND),
    ObjectiveKind.DIRBND: (ObjectiveKind.BND,),
    ObjectiveKind.UBND: (ObjectiveKind.BND,),
    ObjectiveKind.BND: (ObjectiveKind.MPINF,),
    ObjectiveKind.MPINF: (ObjectiveKind.MPSUP,),
    ObjectiveKind.MPSUP: (),
}


def is_decidable(kind: ObjectiveKind) -> bool:
    """
    Check if games with this objective can be solved.

    Args:
        kind: The objective kind

    Returns:
        True for the fixed window kinds, False otherwise
    """
    return kind in FIXED_WINDOW_KINDS


def require_decidable(kind: ObjectiveKind) -> None:
    """
    Reject objectives no solver or oracle can decide.

    Args:
        kind: The objective kind

    Raises:
        UndecidableObjectiveError: If kind is a bounded window kind
    """
    if kind in BOUNDED_WINDOW_KINDS:
        raise UndecidableObjectiveError(
            f"undecidable objective {kind.value}: undecidable (Theorem 3), bounded window "
            "objectives cannot be solved under partial observation"
        )


def implied_objectives(kind: ObjectiveKind) -> Tuple[ObjectiveKind, ...]:
    """
    All objectives implied by an objective, in breadth-first order.

    Args:
        kind: The objective kind

    Returns:
        Implied kinds, excluding kind itself
    """
    order = []
    frontier = list(_IMPLIES[kind])
    while frontier:
        current = frontier.pop(0)
        if current in order:
            continue
        order.append(current)
        frontier.extend(_IMPLIES[current])
    return tuple(order)


def implies(stronger: ObjectiveKind, weaker: ObjectiveKind) -> bool:
    """Whether membership in `stronger` entails membership in `weaker`."""
    return stronger == weaker or weaker in implied_objectives(stronger)


def lmax_guard(arena: Arena) -> int:
    """Largest lmax accepted without a warning."""
    return len(arena.states) * max(arena.max_abs_weight, 1)


def warn_if_large_lmax(arena: Arena, lmax: int, factor: int) -> bool:
    """
    Warn when lmax exceeds |Q|·W·factor.

    Args:
        arena: The arena
        lmax: Requested window bound
        factor: Configured multiplier

    Returns:
        True if a warning was emitted
    """
    bound = lmax_guard(arena) * factor
    if lmax > bound:
        logger.warning(
            "lmax=%d exceeds |Q|*W*%d=%d; constructions may explode", lmax, factor, bound
        )
        return True
    return False


def check_resource_limit(count: int, limit: int, what: str) -> None:
    """
    Abort a construction that exceeds the state limit.

    Args:
        count: Number of constructed states so far
        limit: Configured maximum
        what: Name of the construction, for the message

    Raises:
        ResourceLimitError: If count exceeds limit
    """
    if count > limit:
        raise ResourceLimitError(f"{what} exceeded the limit of {limit} states")
