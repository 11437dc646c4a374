"""Oracle Service: brute-force window semantics on lassos and finite-memory strategies."""
import logging
import math
from collections import deque
from fractions import Fraction
from typing import Dict, Hashable, Iterator, List, Optional, Tuple

import networkx as nx

from src.domain.errors import RangeError, ValidationError
from src.domain.models import (
    AbstractLasso,
    Arena,
    ConcretePath,
    LassoVerdict,
    MooreStrategy,
    MpCertificate,
    Objective,
    ObjectiveKind,
    WindowVerdict,
)
from src.domain.policies import MEAN_PAYOFF_KINDS, require_decidable
from src.services.arena_service import ArenaService

logger = logging.getLogger(__name__)

# Open windows by age 1..lmax-1: the running sum, or None when no window of that age is open
Tracker = Tuple[Optional[int], ...]
Node = Tuple[int, str, Tracker]


def advance_tracker(tracker: Tracker, weight: int, lmax: int) -> Tuple[Tracker, bool]:
    """
    Feed one transition weight to the open-window tracker.

    Args:
        tracker: Open window sums indexed by age - 1
        weight: Weight of the transition taken
        lmax: Window bound

    Returns:
        The new tracker and whether a window reached length lmax while still open
    """
    violated = False
    aged: List[Optional[int]] = [None] * (lmax - 1)
    # The window opened by this transition
    if weight < 0:
        if lmax == 1:
            violated = True
        else:
            aged[0] = weight
    for age, total in enumerate(tracker, start=1):
        if total is None:
            continue
        extended = total + weight
        if extended >= 0:
            continue
        if age + 1 == lmax:
            violated = True
        else:
            aged[age] = extended
    return tuple(aged), violated


class OracleService:
    """Service deciding window objectives on lassos by exhaustive product search."""

    def __init__(self, arena_service: Optional[ArenaService] = None):
        """Initialize the oracle service."""
        self.arena_service = arena_service or ArenaService()

    def good_window(
        self, arena: Arena, path: ConcretePath, position: int, lmax: int
    ) -> WindowVerdict:
        """
        Test the good-window property at a position (threshold 0).

        Args:
            arena: The arena the path lives in
            path: Concrete path; lassos are unrolled as needed
            position: Window start i
            lmax: Window bound

        Returns:
            Verdict with the smallest closing length, or open

        Raises:
            ValidationError: If lmax < 1 or a finite path is too short
        """
        if lmax < 1:
            raise ValidationError("lmax must be at least 1")
        if not path.is_lasso and position + lmax > path.transition_count():
            raise ValidationError(
                f"path of {path.transition_count()} steps is too short for a window of "
                f"{lmax} at {position}"
            )
        total = 0
        states = [path.step(position)[0]]
        for j in range(1, lmax + 1):
            q, a, q2 = path.step(position + j - 1)
            total += arena.weight(q, a, q2)
            states.append(q2)
            if total >= 0:
                return WindowVerdict(
                    position=position, lmax=lmax, closedAt=j, witness=tuple(states)
                )
        return WindowVerdict(position=position, lmax=lmax, closedAt=None, witness=tuple(states))

    def window_product(self, arena: Arena, lasso: AbstractLasso, lmax: int) -> nx.DiGraph:
        """
        Product of lasso positions, states and open-window trackers.

        Edges carry `action`, `weight` and `violation` (a window of length lmax
        stayed open). Only nodes reachable from (0, q_I, empty tracker) appear.
        """
        self.arena_service.validate_lasso(arena, lasso)
        steps = lasso.block_indices(arena)
        start: Node = (0, arena.initial, (None,) * (lmax - 1))
        graph = nx.DiGraph()
        graph.add_node(start)
        queue = deque([start])
        while queue:
            node = queue.popleft()
            t, q, tracker = node
            action = steps[t][1]
            nxt_t = lasso.next_position(t)
            block = arena.blocks[steps[nxt_t][0]]
            for q2, w in arena.successors(q, action):
                if q2 not in block:
                    continue
                tracker2, violated = advance_tracker(tracker, w, lmax)
                nxt: Node = (nxt_t, q2, tracker2)
                if nxt not in graph:
                    graph.add_node(nxt)
                    queue.append(nxt)
                graph.add_edge(node, nxt, action=action, weight=w, violation=violated)
        graph.graph["initial"] = start
        logger.debug(
            "window product: %d nodes, %d edges",
            graph.number_of_nodes(),
            graph.number_of_edges(),
        )
        return graph

    def check_lasso(
        self, arena: Arena, lasso: AbstractLasso, objective: Objective
    ) -> LassoVerdict:
        """
        Decide whether an abstract lasso satisfies an objective.

        A violation is a window of length lmax left open along a concretization
        of a finite prefix. DirFix fails iff some violation is reachable, UFix
        fails iff a violation is reachable from a cycle of the product, and Fix
        fails iff a violation lies on a cycle. The mean-payoff reference kinds
        fail iff the product has a reachable negative cycle.

        Args:
            arena: The arena
            lasso: Abstract lasso, legal for the arena
            objective: DirFix, UFix, Fix, MPInf or MPSup; ν is applied by rescaling

        Returns:
            Membership verdict with a violation witness when not a member

        Raises:
            UndecidableObjectiveError: For bounded window kinds
            LassoError: If the lasso is not a play of the arena
        """
        require_decidable(objective.kind)
        if objective.threshold != 0:
            arena = self.arena_service.rescale(arena, objective.numerator, objective.denominator)
        if objective.kind in MEAN_PAYOFF_KINDS:
            return self._check_mean_payoff(arena, lasso, objective)

        lmax = objective.lmax
        graph = self.window_product(arena, lasso, lmax)
        initial = graph.graph["initial"]
        violations = [(u, v) for u, v, bad in graph.edges(data="violation") if bad]

        if objective.kind == ObjectiveKind.DIRFIX:
            candidates = violations
        elif objective.kind == ObjectiveKind.UFIX:
            cyclic = self._cyclic_nodes(graph)
            after_cycle = set(cyclic)
            for node in cyclic:
                after_cycle |= nx.descendants(graph, node)
            candidates = [(u, v) for u, v in violations if u in after_cycle]
        else:
            component = {}
            for index, scc in enumerate(nx.strongly_connected_components(graph)):
                for node in scc:
                    component[node] = index
            candidates = [(u, v) for u, v in violations if component[u] == component[v]]

        if not candidates:
            return LassoVerdict(kind=objective.kind, lmax=lmax, member=True)
        distance = nx.single_source_shortest_path_length(graph, initial)
        u, v = min(candidates, key=lambda e: distance[e[0]])
        witness = self._path_to(graph, initial, u, v)
        return LassoVerdict(
            kind=objective.kind,
            lmax=lmax,
            member=False,
            violationPosition=witness.transition_count() - lmax,
            witness=witness,
        )

    def _check_mean_payoff(
        self, arena: Arena, lasso: AbstractLasso, objective: Objective
    ) -> LassoVerdict:
        graph = self.window_product(arena, lasso, 1)
        initial = graph.graph["initial"]
        try:
            cycle = nx.find_negative_cycle(graph, initial, weight="weight")
        except nx.NetworkXError:
            return LassoVerdict(kind=objective.kind, member=True)
        prefix = nx.shortest_path(graph, initial, cycle[0])
        nodes = prefix + cycle[1:]
        witness = ConcretePath(
            states=tuple(n[1] for n in nodes),
            actions=tuple(graph.edges[a, b]["action"] for a, b in zip(nodes, nodes[1:])),
            cycleStart=len(prefix) - 1,
        )
        return LassoVerdict(kind=objective.kind, member=False, witness=witness)

    @staticmethod
    def _cyclic_nodes(graph: nx.DiGraph) -> List[Hashable]:
        """Nodes lying on some cycle of the graph."""
        cyclic = []
        for scc in nx.strongly_connected_components(graph):
            if len(scc) > 1:
                cyclic.extend(scc)
            else:
                (node,) = scc
                if graph.has_edge(node, node):
                    cyclic.append(node)
        return cyclic

    @staticmethod
    def _path_to(graph: nx.DiGraph, initial: Node, u: Node, v: Node) -> ConcretePath:
        nodes = nx.shortest_path(graph, initial, u) + [v]
        return ConcretePath(
            states=tuple(n[1] for n in nodes),
            actions=tuple(graph.edges[a, b]["action"] for a, b in zip(nodes, nodes[1:])),
        )

    def strategy_product(self, arena: Arena, strategy: MooreStrategy) -> nx.DiGraph:
        """
        Product of an arena with a Moore strategy.

        From (q, m) with o the block of q, Eve plays σ = α_o(m, o) and the
        memory becomes α_u(m, o); every σ-successor q′ gives an edge to
        (q′, α_u(m, o)) carrying w(q, σ, q′).

        Args:
            arena: The arena
            strategy: Total Moore strategy over the arena's blocks

        Returns:
            Directed graph on reachable (state, memory) pairs

        Raises:
            ValidationError: If the strategy is undefined on a reached pair
        """
        start = (arena.initial, strategy.initialMemory)
        graph = nx.DiGraph()
        graph.add_node(start)
        graph.graph["initial"] = start
        queue = deque([start])
        while queue:
            q, m = queue.popleft()
            block = arena.block_of(q)
            try:
                action = strategy.output[m][block]
                memory = strategy.update[m][block]
            except KeyError:
                raise ValidationError(f"strategy undefined on memory '{m}' and block {block}")
            if action not in arena.alphabet:
                raise ValidationError(f"strategy plays unknown action '{action}'")
            for q2, w in arena.successors(q, action):
                nxt = (q2, memory)
                if nxt not in graph:
                    graph.add_node(nxt)
                    queue.append(nxt)
                graph.add_edge((q, m), nxt, weight=w, action=action)
        return graph

    def verify_mp_strategy(
        self, arena: Arena, strategy: MooreStrategy, epsilon: Fraction
    ) -> MpCertificate:
        """
        Certify that every cycle consistent with a strategy has mean weight at least ε.

        Args:
            arena: The arena (threshold already normalized)
            strategy: Finite-memory strategy
            epsilon: Positive rational ε

        Returns:
            Certificate with μ = ⌈(W·|M||Q|/ε)·|M||Q|⌉ under which the strategy wins
            DirFix(μ), or a refutation with a cycle of mean below ε

        Raises:
            RangeError: If ε is not positive
        """
        epsilon = Fraction(epsilon)
        if epsilon <= 0:
            raise RangeError("epsilon must be positive")
        graph = self.strategy_product(arena, strategy)
        scaled = nx.DiGraph()
        for u, v, w in graph.edges(data="weight"):
            scaled.add_edge(u, v, weight=epsilon.denominator * w - epsilon.numerator)
        initial = graph.graph["initial"]
        try:
            cycle = nx.find_negative_cycle(scaled, initial, weight="weight")
        except nx.NetworkXError:
            size = len(strategy.memory) * len(arena.states)
            mu = math.ceil(Fraction(arena.max_abs_weight * size) / epsilon * size)
            logger.debug("strategy certified: product %d nodes, mu=%d", graph.number_of_nodes(), mu)
            return MpCertificate(
                certified=True,
                epsilon=epsilon,
                mu=max(mu, 1),
                productSize=graph.number_of_nodes(),
            )
        weights = [graph.edges[a, b]["weight"] for a, b in zip(cycle, cycle[1:])]
        return MpCertificate(
            certified=False,
            epsilon=epsilon,
            cycle=tuple(cycle),
            cycleMean=Fraction(sum(weights), len(weights)),
            productSize=graph.number_of_nodes(),
        )

    def consistent_lassos(
        self, arena: Arena, strategy: MooreStrategy, max_length: int
    ) -> Iterator[AbstractLasso]:
        """
        Enumerate abstract lassos consistent with a Moore strategy.

        A configuration (knowledge, memory, block) determines the rest of the
        play up to Adam's choices, so every simple path of configurations that
        closes back on itself yields one lasso.

        Args:
            arena: The arena
            strategy: Moore strategy
            max_length: Bound on prefix + cycle length

        Yields:
            Lassos in depth-first order
        """
        start = (frozenset({arena.initial}), strategy.initialMemory, arena.block_of(arena.initial))

        def extend(path: List[Tuple]) -> Iterator[AbstractLasso]:
            knowledge, memory, block = path[-1]
            action = strategy.output[memory][block]
            memory2 = strategy.update[memory][block]
            post = arena.post(knowledge, action)
            for index, observed in enumerate(arena.blocks):
                nxt = (post & observed, memory2, index)
                if not nxt[0]:
                    continue
                steps = [(arena.blocks[c[2]], strategy.output[c[1]][c[2]]) for c in path]
                if nxt in path:
                    loop = path.index(nxt)
                    yield AbstractLasso(prefix=tuple(steps[:loop]), cycle=tuple(steps[loop:]))
                elif len(path) < max_length:
                    yield from extend(path + [nxt])

        yield from extend([start])
