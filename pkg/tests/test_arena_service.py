from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.domain.errors import LassoError, NotFoundError, RangeError
from src.domain.models import AbstractLasso, AbstractPath, ConcretePath
from src.infra.formats.wga_codec import parse_arena
from src.services.arena_service import WEIGHT_LIMIT, ArenaService
from tests.conftest import FIG3_WGA


@pytest.fixture()
def service() -> ArenaService:
    return ArenaService()


def test_rescale_maps_weights_to_b_w_minus_a(service, fig3) -> None:
    scaled = service.rescale(fig3, 1, 2)

    assert scaled.weight("q0", "a", "q1") == -3
    assert scaled.weight("q1", "a", "q0") == 1
    assert scaled.weight("q1", "a", "q1") == -1
    assert scaled.blocks == fig3.blocks


def test_rescale_by_zero_threshold_is_identity(service, fig3) -> None:
    assert service.rescale(fig3, 0, 1) is fig3


def test_rescale_overflow(service, fig3) -> None:
    with pytest.raises(RangeError):
        service.rescale(fig3, WEIGHT_LIMIT, 1)


@given(
    numerator=st.integers(min_value=-50, max_value=50),
    denominator=st.integers(min_value=1, max_value=20),
)
def test_rescale_is_affine(numerator: int, denominator: int) -> None:
    arena = parse_arena(FIG3_WGA)
    scaled = ArenaService().rescale(arena, numerator, denominator)

    for t in arena.transitions:
        assert scaled.weight(t.source, t.action, t.target) == denominator * t.weight - numerator


def test_payoff_on_lasso_path(service, fig3) -> None:
    path = ConcretePath(states=("q0", "q1", "q0"), actions=("a", "a"), cycleStart=0)

    assert service.payoff(fig3, path, 0) == 0
    assert service.payoff(fig3, path, 1) == -1
    assert service.payoff(fig3, path, 5) == -1
    assert service.mean_payoff_of_lasso(fig3, path) == Fraction(0)


@given(st.lists(st.booleans(), min_size=1, max_size=12), st.integers(min_value=0, max_value=12))
def test_payoff_is_additive(stay: list, split: int) -> None:
    arena = parse_arena(FIG3_WGA)
    states = ["q0", "q1"]
    for s in stay:
        current = states[-1]
        if current == "q0":
            states.append("q1")
        else:
            states.append("q1" if s else "q0")
    path = ConcretePath(states=tuple(states), actions=("a",) * (len(states) - 1))
    n = path.transition_count()
    split = min(split, n)
    service = ArenaService()

    total = service.payoff(arena, path, n)
    head = service.payoff(arena, path, split)
    tail = sum(arena.weight(*path.step(i)) for i in range(split, n))
    assert total == head + tail


def test_payoff_beyond_finite_path(service, fig3) -> None:
    path = ConcretePath(states=("q0", "q1"), actions=("a",))

    with pytest.raises(RangeError):
        service.payoff(fig3, path, 2)


def test_post_rejects_unknown_action(service, fig3) -> None:
    assert service.post(fig3, {"q0", "q1"}, "a") == frozenset({"q0", "q1"})
    with pytest.raises(NotFoundError):
        service.post(fig3, {"q0"}, "b")


def test_concretizations_of_blind_prefix(service, fig2) -> None:
    block = frozenset({"q0", "q1"})
    abstract = AbstractPath(observations=(block, block, block), actions=("a", "a"))

    paths = service.concretizations(fig2, abstract)

    assert [p.states for p in paths] == [
        ("q0", "q0", "q0"),
        ("q0", "q0", "q1"),
        ("q0", "q1", "q1"),
    ]


def test_validate_lasso(service, fig3) -> None:
    legal = AbstractLasso(prefix=(), cycle=((frozenset({"q0"}), "a"), (frozenset({"q1"}), "a")))
    service.validate_lasso(fig3, legal)

    wrong_start = AbstractLasso(prefix=(), cycle=((frozenset({"q1"}), "a"),))
    with pytest.raises(LassoError, match="initial state"):
        service.validate_lasso(fig3, wrong_start)

    # q0 can only move to q1
    infeasible = AbstractLasso(prefix=(), cycle=((frozenset({"q0"}), "a"),))
    with pytest.raises(LassoError, match="no concretization"):
        service.validate_lasso(fig3, infeasible)

    unknown_action = AbstractLasso(prefix=(), cycle=((frozenset({"q0"}), "b"),))
    with pytest.raises(LassoError, match="unknown action"):
        service.validate_lasso(fig3, unknown_action)
