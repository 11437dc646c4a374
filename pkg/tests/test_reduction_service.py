import random
from fractions import Fraction

import pytest

from src.domain.errors import NotFoundError, ValidationError
from src.domain.models import AbstractLasso, SafetySpec, Transition
from src.infra.formats.wfa_codec import parse_automaton
from src.infra.formats.lasso_codec import parse_lasso, serialize_lasso
from src.infra.formats.wga_codec import canonical_arena, parse_arena, serialize_arena
from src.services.dirfix_service import DirfixService
from src.services.reduction_service import SEPARATOR, ReductionService
from tests.conftest import random_arena

STEP_WFA = """\
states: s0 s1
init: s0
alphabet: a
final: s1
trans: s0 a 0 s1
"""

NEGATIVE_WFA = """\
states: s0 s1
init: s0
alphabet: a
final: s1
trans: s0 a -1 s1
trans: s1 a -1 s1
"""

COSTLY_WFA = """\
states: s0 s1
init: s0
alphabet: a
final: s1
trans: s0 a 1 s1
trans: s1 a -5 s1
"""


@pytest.fixture()
def service() -> ReductionService:
    return ReductionService()


def test_wfa_cost(service) -> None:
    automaton = parse_automaton(STEP_WFA)

    assert service.wfa_cost(automaton, ["a"]) == 0
    assert service.wfa_cost(automaton, []) is None
    assert service.wfa_cost(automaton, ["a", "a"]) is None


def test_wfa_cost_takes_the_cheapest_run(service) -> None:
    automaton = parse_automaton(COSTLY_WFA)

    assert service.wfa_cost(automaton, ["a", "a", "a"]) == -9


def test_wfa_cost_rejects_foreign_letters(service) -> None:
    with pytest.raises(ValidationError):
        service.wfa_cost(parse_automaton(STEP_WFA), ["b"])


def test_empty_word_is_a_counterexample_when_initial_is_final(service) -> None:
    automaton = parse_automaton("states: s\ninit: s\nalphabet: a\nfinal: s\n")

    result = service.is_universal_bounded(automaton, 3)

    assert not result.universal
    assert result.counterexample == ()
    assert result.cost == 0


def test_words_without_run_do_not_break_universality(service) -> None:
    automaton = parse_automaton("states: s\ninit: s\nalphabet: a\ntrans: s a 1 s\n")

    assert service.is_universal_bounded(automaton, 4).universal


def test_negative_automaton_is_universal(service) -> None:
    assert service.is_universal_bounded(parse_automaton(NEGATIVE_WFA), 5).universal


def test_first_counterexample_in_length_order(service) -> None:
    result = service.is_universal_bounded(parse_automaton(COSTLY_WFA), 5)

    assert result.counterexample == ("a",)
    assert result.cost == 1


def random_spec(rng: random.Random) -> SafetySpec:
    arena = random_arena(rng, max_states=4, max_weight=0)
    unsafe = {q for q in arena.states if q != arena.initial and rng.random() < 0.4}
    transitions = [t for t in arena.transitions if t.source not in unsafe]
    for u in unsafe:
        for a in arena.alphabet:
            transitions.append(Transition(source=u, action=a, weight=0, target=u))
    trapped = canonical_arena(
        arena.states, arena.initial, arena.alphabet, transitions, arena.observations
    )
    return SafetySpec(arena=trapped, unsafe=frozenset(unsafe))


@pytest.mark.parametrize("lmax", [1, 2])
def test_safety_reduction_preserves_the_winner(service, lmax: int) -> None:
    rng = random.Random(17)
    dirfix = DirfixService()
    for _ in range(30):
        spec = random_spec(rng)
        arena = service.safety_to_dirfix(spec)
        assert dirfix.solve_dirfix(arena, lmax).winner == service.solve_safety_spec(spec)


def test_safety_spec_needs_trapping_unsafe_states(fig3) -> None:
    with pytest.raises(ValidationError, match="trapping"):
        SafetySpec(arena=fig3, unsafe=frozenset({"q1"}))
    with pytest.raises(NotFoundError):
        SafetySpec(arena=fig3, unsafe=frozenset({"q9"}))


def test_universality_gadget_is_blind_and_scaled(service) -> None:
    arena = service.universality_gadget(parse_automaton(STEP_WFA))

    assert arena.is_blind
    assert arena.weightScale == 2
    assert SEPARATOR in arena.alphabet
    assert {"init", "q1", "q5", "n_s0", "n_s1", "bot"} <= set(arena.states)


def test_simulation_gadget(service) -> None:
    arena = service.simulation_gadget(parse_automaton(STEP_WFA))

    assert arena.is_blind
    assert arena.initial == "q5"
    assert arena.state_order == ("bot", "n_s0", "n_s1", "q5")
    assert arena.weight("n_s1", SEPARATOR, "n_s0") == 1
    assert arena.weight("n_s0", SEPARATOR, "bot") == 0


def test_separator_letter_is_reserved(service) -> None:
    automaton = parse_automaton(
        f"states: s\ninit: s\nalphabet: a {SEPARATOR}\ntrans: s a 0 s\n"
    )

    with pytest.raises(ValidationError, match="alphabet clash"):
        service.universality_gadget(automaton)
    with pytest.raises(ValidationError, match="alphabet clash"):
        service.simulation_gadget(automaton)


@pytest.mark.parametrize("build", ["universality_gadget", "simulation_gadget"])
def test_gadget_survives_the_text_formats(service, build: str) -> None:
    arena = getattr(service, build)(parse_automaton(STEP_WFA))
    text = serialize_arena(arena)

    restored = parse_arena(text)

    assert SEPARATOR in restored.alphabet
    assert set(restored.transitions) == set(arena.transitions)
    assert set(restored.blocks) == set(arena.blocks)
    assert restored.weightScale == arena.weightScale
    block = arena.blocks[0]
    lasso = AbstractLasso(prefix=((block, SEPARATOR),), cycle=((block, "a"),))
    assert parse_lasso(serialize_lasso(lasso)) == lasso


def test_separator_strategy_cycles_through_the_word(service) -> None:
    arena = service.simulation_gadget(parse_automaton(STEP_WFA))

    strategy = service.separator_strategy(arena, ["a"])

    assert strategy.memory == ("m0", "m1")
    assert strategy.output["m0"][0] == SEPARATOR
    assert strategy.output["m1"][0] == "a"
    assert strategy.update["m1"][0] == "m0"
    with pytest.raises(ValidationError):
        service.separator_strategy(arena, [])


def test_accepted_word_yields_a_certified_strategy(service) -> None:
    result = service.certify_separator_strategy(parse_automaton(STEP_WFA), ["a"])

    assert result.certificate.certified
    assert result.certificate.epsilon == Fraction(1, 2)
    assert result.certificate.mu == 256
    assert result.dirfix_confirmed
    assert result.lassos_checked >= 1


def test_negative_run_is_refuted(service) -> None:
    result = service.certify_separator_strategy(parse_automaton(NEGATIVE_WFA), ["a"])

    assert not result.certificate.certified
    assert result.certificate.cycleMean == Fraction(-1, 2)
    assert not result.dirfix_confirmed
    assert result.lassos_checked == 0


def test_gap_window_demo(service) -> None:
    lasso, verdict = service.gap_window_demo(parse_automaton(STEP_WFA), 2)

    assert len(lasso.cycle) == 3
    assert lasso.cycle[0][1] == SEPARATOR
    assert not verdict.member
    assert verdict.lmax == 3


def test_gap_must_be_positive(service) -> None:
    with pytest.raises(ValidationError):
        service.gap_window_demo(parse_automaton(STEP_WFA), 0)


def test_hash_starvation_demo(service) -> None:
    lasso, verdict = service.hash_starvation_demo(parse_automaton(STEP_WFA), 2)

    assert lasso.prefix[0][1] == SEPARATOR
    assert lasso.cycle[0][1] == "a"
    assert not verdict.member
