import itertools
import random

import networkx as nx
import pytest

from src.domain.errors import ValidationError
from src.domain.games import ADAM, EVE, ParityGame
from src.domain.models import Winner
from src.services.parity_service import PARITY_ENGINES, ParityService, attractor
from tests.conftest import fig7


def random_game(rng: random.Random, size: int = 5, top: int = 3) -> ParityGame:
    game = ParityGame(initial=0)
    for v in range(size):
        game.add_vertex(v, rng.choice((EVE, ADAM)), rng.randint(0, top))
    for v in range(size):
        game.edges[v] = tuple(rng.sample(range(size), rng.randint(1, 2)))
    return game


def eve_wins_with(game: ParityGame, choice) -> bool:
    """No cycle reachable in the restricted graph has an odd top priority."""
    graph = nx.DiGraph()
    for v in game.vertices:
        targets = (choice[v],) if game.owner[v] == EVE else game.edges[v]
        for u in targets:
            graph.add_edge(v, u)
    reachable = nx.descendants(graph, game.initial) | {game.initial}
    for p in range(1, game.max_priority + 1, 2):
        low = graph.subgraph(v for v in reachable if game.priority[v] <= p)
        for scc in nx.strongly_connected_components(low):
            on_cycle = len(scc) > 1 or any(low.has_edge(v, v) for v in scc)
            if on_cycle and any(game.priority[v] == p for v in scc):
                return False
    return True


def brute_force(game: ParityGame) -> Winner:
    eve = [v for v in game.vertices if game.owner[v] == EVE]
    for picks in itertools.product(*(game.edges[v] for v in eve)):
        if eve_wins_with(game, dict(zip(eve, picks))):
            return Winner.EVE
    return Winner.ADAM


@pytest.fixture()
def service() -> ParityService:
    return ParityService()


def test_attractor_forces_through_adam_vertices() -> None:
    game = ParityGame(initial="a")
    game.add_vertex("a", ADAM, 0)
    game.add_vertex("b", EVE, 0)
    game.add_vertex("t", EVE, 0)
    game.edges = {"a": ("b", "t"), "b": ("t", "a"), "t": ("t",)}

    attr, strategy = attractor(game, set(game.vertices), {"t"}, EVE, game.predecessors())

    assert attr == {"a", "b", "t"}
    assert strategy == {"b": "t"}


def test_engines_agree_with_brute_force(service) -> None:
    rng = random.Random(5)
    for _ in range(60):
        game = random_game(rng)
        expected = brute_force(game)
        zielonka = service.solve_parity(game, "zielonka")
        spm = service.solve_parity(game, "spm")

        assert zielonka.winner == expected
        assert spm.winner == expected
        assert zielonka.regions[EVE] == spm.regions[EVE]
        assert zielonka.regions[EVE] | zielonka.regions[ADAM] == set(game.vertices)


def test_winning_strategy_is_winning(service) -> None:
    rng = random.Random(8)
    for _ in range(30):
        game = random_game(rng)
        solution = service.solve_parity(game, "zielonka")
        if solution.winner != Winner.EVE:
            continue
        choice = {v: game.edges[v][0] for v in game.vertices}
        choice.update(solution.strategies[EVE])
        assert eve_wins_with(game, choice)


def test_unknown_engine(service) -> None:
    game = ParityGame(initial=0)
    game.add_vertex(0, EVE, 0)
    game.edges[0] = (0,)

    with pytest.raises(ValidationError, match="unknown parity engine"):
        service.solve_parity(game, "strategy-iteration")


def test_dead_end_is_rejected(service) -> None:
    game = ParityGame(initial=0)
    game.add_vertex(0, EVE, 0)

    with pytest.raises(ValidationError):
        service.solve_parity(game)


@pytest.mark.parametrize("engine", PARITY_ENGINES)
def test_blind_arena(service, fig2, engine: str) -> None:
    assert service.solve_fix(fig2, 2, engine).winner == Winner.EVE
    assert service.solve_ufix(fig2, 2, engine).winner == Winner.ADAM


@pytest.mark.parametrize("lmax", [1, 2])
def test_zero_loop_arena(service, fig3, lmax: int) -> None:
    assert service.solve_fix(fig3, lmax).winner == Winner.ADAM
    assert service.solve_ufix(fig3, lmax).winner == Winner.ADAM


@pytest.mark.slow
@pytest.mark.parametrize("lmax", [1, 2])
def test_dying_branch_separates_fix_from_ufix(service, lmax: int) -> None:
    arena = fig7(lmax + 2)

    assert service.solve_fix(arena, lmax).winner == Winner.EVE
    assert service.solve_ufix(arena, lmax).winner == Winner.ADAM


def test_counts_are_reported(service, zero_arena) -> None:
    result = service.solve_fix(zero_arena, 1)

    assert result.winner == Winner.EVE
    assert set(result.counts) == {"nbaStates", "parityStates", "gameVertices", "maxPriority"}
    assert result.counts["gameVertices"] == len(result.game.vertices)
