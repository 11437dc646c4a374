import pytest

from src.domain.errors import NotFoundError, ParseError, ValidationError
from src.infra.formats.lasso_codec import parse_lasso, serialize_lasso
from src.infra.formats.wfa_codec import parse_automaton, serialize_automaton
from src.infra.formats.wga_codec import parse_arena, serialize_arena
from tests.conftest import FIG2_WGA, FIG3_WGA

AUTOMATON_WFA = """\
states: s0 s1
init: s0
alphabet: a b
final: s1
trans: s0 a -1 s1
trans: s1 b 2 s1
"""


def test_parse_fig3_arena() -> None:
    arena = parse_arena(FIG3_WGA)

    assert arena.state_order == ("q0", "q1")
    assert arena.initial == "q0"
    assert arena.blocks == (frozenset({"q0"}), frozenset({"q1"}))
    assert arena.successors("q1", "a") == (("q0", 1), ("q1", 0))
    assert arena.max_abs_weight == 1
    assert not arena.is_blind


def test_blind_arena_keeps_initial_in_shared_block() -> None:
    arena = parse_arena(FIG2_WGA)

    assert arena.is_blind
    assert arena.block_of("q0") == arena.block_of("q1") == 0


def test_serialized_arena_reads_back_identically() -> None:
    text = serialize_arena(parse_arena(FIG3_WGA))

    assert serialize_arena(parse_arena(text)) == text
    assert text.startswith("states: q0 q1\ninit: q0\n")


def test_scale_line_is_kept() -> None:
    arena = parse_arena(FIG3_WGA + "scale: 2\n")

    assert arena.weightScale == 2
    assert "scale: 2" in serialize_arena(arena)


def test_parse_error_carries_line_number() -> None:
    text = FIG3_WGA.replace("trans: q1 a 0 q1", "trans: q1 a zero q1")

    with pytest.raises(ParseError) as excinfo:
        parse_arena(text)

    assert excinfo.value.line == 7
    assert "line 7" in str(excinfo.value)


@pytest.mark.parametrize(
    "text",
    [
        "states: q\ninit: q\nalphabet: a\ntrans: q a 0 q\n",
        "states: q\ninit: q\ninit: q\nalphabet: a\nobs: {q}\ntrans: q a 0 q\n",
        "states: q\ninit: q\nalphabet: a\nobs: {q}\nfoo: bar\ntrans: q a 0 q\n",
        "states: q\ninit: q\nalphabet: a\nobs: {}\ntrans: q a 0 q\n",
        "states: q\ninit: q\nalphabet: a\nobs: {q}\ntrans: q a 0\n",
    ],
)
def test_malformed_documents_are_parse_errors(text: str) -> None:
    with pytest.raises(ParseError):
        parse_arena(text)


def test_non_total_relation_is_rejected() -> None:
    text = FIG3_WGA.replace("trans: q0 a -1 q1\n", "")

    with pytest.raises(ValidationError, match="not total"):
        parse_arena(text)


def test_initial_state_must_be_alone_in_its_block() -> None:
    text = """\
states: q0 q1 q2
init: q0
alphabet: a
obs: {q0 q1} {q2}
trans: q0 a 0 q1
trans: q1 a 0 q2
trans: q2 a 0 q2
"""
    with pytest.raises(ValidationError, match="initial observation not singleton"):
        parse_arena(text)


def test_observations_must_partition_states() -> None:
    text = FIG3_WGA.replace("obs: {q0} {q1}", "obs: {q0}")

    with pytest.raises(ValidationError, match="partition"):
        parse_arena(text)


def test_parallel_edges_are_rejected() -> None:
    with pytest.raises(ValidationError, match="parallel"):
        parse_arena(FIG3_WGA + "trans: q1 a 3 q1\n")


def test_unknown_identifier_in_transition() -> None:
    with pytest.raises(NotFoundError, match="q9"):
        parse_arena(FIG3_WGA + "trans: q1 a 3 q9\n")


def test_lasso_notation() -> None:
    lasso = parse_lasso("{q0} a | {q1} a {q1, q2} b")

    assert lasso.prefix == ((frozenset({"q0"}), "a"),)
    assert lasso.cycle == ((frozenset({"q1"}), "a"), (frozenset({"q1", "q2"}), "b"))
    assert serialize_lasso(lasso) == "{q0} a | {q1} a {q1 q2} b"


def test_lasso_without_bar_is_all_cycle() -> None:
    lasso = parse_lasso("{q0} a")

    assert lasso.prefix == ()
    assert len(lasso.cycle) == 1


@pytest.mark.parametrize("text", ["{q0} a |", "{q0} a | {q1}", "{} a", "{q0} a | {q1} a | {q0} a"])
def test_malformed_lassos(text: str) -> None:
    with pytest.raises(ParseError):
        parse_lasso(text)


def test_weighted_automaton_format() -> None:
    automaton = parse_automaton(AUTOMATON_WFA)

    assert automaton.final == frozenset({"s1"})
    assert automaton.alphabet == ("a", "b")
    assert parse_automaton(serialize_automaton(automaton)) == automaton


def test_weighted_automaton_with_unknown_letter() -> None:
    with pytest.raises(ValidationError, match="unknown letter"):
        parse_automaton(AUTOMATON_WFA + "trans: s0 c 0 s0\n")
