"""Shared arenas and generators for the test suite."""
import random
from typing import Callable, List

import pytest

from src.domain.models import AbstractLasso, Arena, Transition
from src.infra.formats.wga_codec import canonical_arena, parse_arena

FIG2_WGA = """\
# blind: Eve cannot tell when the -1 edge is taken
states: q0 q1
init: q0
alphabet: a
obs: {q0 q1}
trans: q0 a 0 q0
trans: q0 a -1 q1
trans: q1 a 0 q1
"""

FIG3_WGA = """\
states: q0 q1
init: q0
alphabet: a
obs: {q0} {q1}
trans: q0 a -1 q1
trans: q1 a 1 q0
trans: q1 a 0 q1
"""

ZERO_WGA = """\
states: q
init: q
alphabet: a
obs: {q}
trans: q a 0 q
"""


def fig7(n: int) -> Arena:
    """Two zero-weight chains of length n behind a branch.

    The p-chain opens a -1 window and gets stuck; the q-chain returns to q0.
    """
    states = ["q0"] + [f"q{i}" for i in range(1, n + 1)] + [f"p{i}" for i in range(1, n + 1)]
    transitions = [
        Transition(source="q0", action="a", weight=0, target="q1"),
        Transition(source="q0", action="a", weight=-1, target="p1"),
        Transition(source=f"q{n}", action="a", weight=0, target="q0"),
        Transition(source=f"p{n}", action="a", weight=0, target=f"p{n}"),
    ]
    for i in range(1, n):
        transitions.append(Transition(source=f"q{i}", action="a", weight=0, target=f"q{i + 1}"))
        transitions.append(Transition(source=f"p{i}", action="a", weight=0, target=f"p{i + 1}"))
    blocks = [{"q0"}] + [{f"q{i}", f"p{i}"} for i in range(1, n + 1)]
    return canonical_arena(states, "q0", ["a"], transitions, blocks)


def fig7_lasso(n: int) -> AbstractLasso:
    """The only play of fig7(n) that keeps returning to q0."""
    steps = [(frozenset({"q0"}), "a")] + [
        (frozenset({f"q{i}", f"p{i}"}), "a") for i in range(1, n + 1)
    ]
    return AbstractLasso(prefix=(), cycle=tuple(steps))


def single_state(weight: int) -> Arena:
    return canonical_arena(
        ["q"], "q", ["a"], [Transition(source="q", action="a", weight=weight, target="q")], [{"q"}]
    )


def random_arena(
    rng: random.Random,
    max_states: int = 3,
    max_actions: int = 2,
    max_weight: int = 2,
    blind_rate: float = 0.3,
) -> Arena:
    """Random total arena with q0 alone in its block, or blind."""
    n = rng.randint(1, max_states)
    states = [f"q{i}" for i in range(n)]
    actions = [chr(ord("a") + i) for i in range(rng.randint(1, max_actions))]
    transitions = []
    for q in states:
        for a in actions:
            for target in rng.sample(states, rng.randint(1, min(2, n))):
                transitions.append(
                    Transition(
                        source=q,
                        action=a,
                        weight=rng.randint(-max_weight, max_weight),
                        target=target,
                    )
                )
    if n == 1 or rng.random() < blind_rate:
        blocks = [set(states)]
    else:
        groups = {}
        for q in states[1:]:
            groups.setdefault(rng.randint(0, n - 2), set()).add(q)
        blocks = [{"q0"}] + list(groups.values())
    return canonical_arena(states, "q0", actions, transitions, blocks)


@pytest.fixture()
def fig2() -> Arena:
    return parse_arena(FIG2_WGA)


@pytest.fixture()
def fig3() -> Arena:
    return parse_arena(FIG3_WGA)


@pytest.fixture()
def zero_arena() -> Arena:
    return parse_arena(ZERO_WGA)


@pytest.fixture()
def fig2_lasso() -> AbstractLasso:
    return AbstractLasso(prefix=(), cycle=((frozenset({"q0", "q1"}), "a"),))


@pytest.fixture()
def random_arenas() -> Callable[..., List[Arena]]:
    """Factory of seeded random arenas."""

    def make(count: int, seed: int = 0, **bounds) -> List[Arena]:
        rng = random.Random(seed)
        return [random_arena(rng, **bounds) for _ in range(count)]

    return make
