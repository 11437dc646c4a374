from fractions import Fraction

import pytest

from src.domain.errors import RangeError, UndecidableObjectiveError, ValidationError
from src.domain.models import AbstractLasso, ConcretePath, MooreStrategy, Objective, ObjectiveKind
from src.services.oracle_service import OracleService, advance_tracker
from tests.conftest import fig7, fig7_lasso, single_state

Q0 = frozenset({"q0"})
Q1 = frozenset({"q1"})


@pytest.fixture()
def oracle() -> OracleService:
    return OracleService()


def objective(kind: ObjectiveKind, lmax=None, a: int = 0, b: int = 1) -> Objective:
    return Objective(kind=kind, lmax=lmax, numerator=a, denominator=b)


def blind_strategy(action: str = "a") -> MooreStrategy:
    return MooreStrategy(
        memory=("m",), initialMemory="m", update={"m": {0: "m"}}, output={"m": {0: action}}
    )


def test_tracker_reports_window_left_open() -> None:
    tracker, violated = advance_tracker((None,), -1, 2)
    assert tracker == (-1,) and not violated

    tracker, violated = advance_tracker(tracker, 0, 2)
    assert tracker == (None,) and violated

    tracker, violated = advance_tracker((-1,), 1, 2)
    assert tracker == (None,) and not violated


def test_lmax_one_violates_on_every_negative_weight() -> None:
    assert advance_tracker((), -1, 1) == ((), True)
    assert advance_tracker((), 0, 1) == ((), False)


def test_good_window(oracle, fig3) -> None:
    path = ConcretePath(states=("q0", "q1", "q0"), actions=("a", "a"), cycleStart=0)

    closed = oracle.good_window(fig3, path, 0, 2)
    assert closed.is_closed and closed.closedAt == 2
    assert closed.witness == ("q0", "q1", "q0")

    opened = oracle.good_window(fig3, path, 0, 1)
    assert not opened.is_closed

    # starts on the +1 edge
    assert oracle.good_window(fig3, path, 1, 1).closedAt == 1


def test_good_window_needs_enough_path(oracle, fig3) -> None:
    path = ConcretePath(states=("q0", "q1"), actions=("a",))

    with pytest.raises(ValidationError):
        oracle.good_window(fig3, path, 0, 2)


def test_blind_lasso_is_in_fix_but_not_ufix(oracle, fig2, fig2_lasso) -> None:
    fix = oracle.check_lasso(fig2, fig2_lasso, objective(ObjectiveKind.FIX, 2))
    ufix = oracle.check_lasso(fig2, fig2_lasso, objective(ObjectiveKind.UFIX, 2))
    dirfix = oracle.check_lasso(fig2, fig2_lasso, objective(ObjectiveKind.DIRFIX, 2))

    assert fix.member
    assert not ufix.member
    assert not dirfix.member


def test_dirfix_witness_is_the_earliest_violation(oracle, fig2, fig2_lasso) -> None:
    verdict = oracle.check_lasso(fig2, fig2_lasso, objective(ObjectiveKind.DIRFIX, 2))

    assert verdict.violationPosition == 0
    assert verdict.witness.states == ("q0", "q1", "q1")


def test_alternating_lasso_closes_every_window_at_two(oracle, fig3) -> None:
    lasso = AbstractLasso(prefix=(), cycle=((Q0, "a"), (Q1, "a")))

    for kind in (ObjectiveKind.DIRFIX, ObjectiveKind.UFIX, ObjectiveKind.FIX):
        assert oracle.check_lasso(fig3, lasso, objective(kind, 2)).member
        assert not oracle.check_lasso(fig3, lasso, objective(kind, 1)).member


def test_lasso_with_zero_loop_violates_every_period(oracle, fig3) -> None:
    lasso = AbstractLasso(prefix=(), cycle=((Q0, "a"), (Q1, "a"), (Q1, "a")))

    for kind in (ObjectiveKind.DIRFIX, ObjectiveKind.UFIX, ObjectiveKind.FIX):
        assert not oracle.check_lasso(fig3, lasso, objective(kind, 2)).member


def test_single_violation_in_prefix_keeps_fix_and_ufix(oracle, fig3) -> None:
    lasso = AbstractLasso(prefix=((Q0, "a"),), cycle=((Q1, "a"),))

    assert not oracle.check_lasso(fig3, lasso, objective(ObjectiveKind.DIRFIX, 2)).member
    assert oracle.check_lasso(fig3, lasso, objective(ObjectiveKind.UFIX, 2)).member
    assert oracle.check_lasso(fig3, lasso, objective(ObjectiveKind.FIX, 2)).member


@pytest.mark.parametrize("lmax", [1, 2])
def test_dying_branch_violates_ufix_only(oracle, lmax: int) -> None:
    arena = fig7(lmax + 2)
    lasso = fig7_lasso(lmax + 2)

    assert not oracle.check_lasso(arena, lasso, objective(ObjectiveKind.DIRFIX, lmax)).member
    assert not oracle.check_lasso(arena, lasso, objective(ObjectiveKind.UFIX, lmax)).member
    assert oracle.check_lasso(arena, lasso, objective(ObjectiveKind.FIX, lmax)).member


def test_zero_arena_satisfies_everything(oracle, zero_arena) -> None:
    lasso = AbstractLasso(prefix=(), cycle=((frozenset({"q"}), "a"),))

    for kind in (ObjectiveKind.DIRFIX, ObjectiveKind.UFIX, ObjectiveKind.FIX):
        assert oracle.check_lasso(zero_arena, lasso, objective(kind, 1)).member
    for kind in (ObjectiveKind.MPINF, ObjectiveKind.MPSUP):
        assert oracle.check_lasso(zero_arena, lasso, objective(kind)).member


def test_threshold_is_applied_by_rescaling(oracle, zero_arena) -> None:
    lasso = AbstractLasso(prefix=(), cycle=((frozenset({"q"}), "a"),))

    assert not oracle.check_lasso(
        zero_arena, lasso, objective(ObjectiveKind.FIX, 3, a=1, b=2)
    ).member
    assert oracle.check_lasso(zero_arena, lasso, objective(ObjectiveKind.FIX, 3, a=-1, b=2)).member


def test_mean_payoff_reference_kinds(oracle, fig2, fig2_lasso) -> None:
    verdict = oracle.check_lasso(fig2, fig2_lasso, objective(ObjectiveKind.MPINF))
    assert verdict.member

    negative = single_state(-1)
    lasso = AbstractLasso(prefix=(), cycle=((frozenset({"q"}), "a"),))
    refuted = oracle.check_lasso(negative, lasso, objective(ObjectiveKind.MPSUP))
    assert not refuted.member
    assert refuted.witness.is_lasso


def test_bounded_window_kinds_are_undecidable(oracle, fig2, fig2_lasso) -> None:
    with pytest.raises(UndecidableObjectiveError, match="undecidable objective"):
        oracle.check_lasso(fig2, fig2_lasso, objective(ObjectiveKind.UDIRBND))


def test_strategy_product(oracle, fig2) -> None:
    graph = oracle.strategy_product(fig2, blind_strategy())

    assert set(graph.nodes) == {("q0", "m"), ("q1", "m")}
    assert graph.edges[("q0", "m"), ("q1", "m")]["weight"] == -1


def test_strategy_must_be_defined_on_reached_blocks(oracle, fig3) -> None:
    partial = MooreStrategy(
        memory=("m",), initialMemory="m", update={"m": {0: "m"}}, output={"m": {0: "a"}}
    )

    with pytest.raises(ValidationError, match="undefined"):
        oracle.strategy_product(fig3, partial)


def test_verify_mp_strategy_certifies_positive_cycles(oracle) -> None:
    certificate = oracle.verify_mp_strategy(single_state(1), blind_strategy(), Fraction(1))

    assert certificate.certified
    assert certificate.mu == 1
    assert certificate.productSize == 1


def test_verify_mp_strategy_refutes_zero_cycle(oracle, fig2) -> None:
    certificate = oracle.verify_mp_strategy(fig2, blind_strategy(), Fraction(1, 2))

    assert not certificate.certified
    assert certificate.cycleMean == 0
    assert certificate.mu is None


def test_verify_mp_strategy_needs_positive_epsilon(oracle, fig2) -> None:
    with pytest.raises(RangeError):
        oracle.verify_mp_strategy(fig2, blind_strategy(), Fraction(0))


def test_consistent_lassos_of_blind_strategy(oracle, fig2) -> None:
    lassos = list(oracle.consistent_lassos(fig2, blind_strategy(), 4))

    block = frozenset({"q0", "q1"})
    assert lassos == [AbstractLasso(prefix=((block, "a"),), cycle=((block, "a"),))]
