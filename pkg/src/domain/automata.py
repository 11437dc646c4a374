"""Observer automata over lasso words: Büchi observers, parity observers and the belief machine."""
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Hashable, Iterable, List, Optional, Tuple

from src.domain.errors import ValidationError
from src.domain.models import Arena
from src.domain.policies import check_resource_limit

Letter = Hashable
State = Hashable
Belief = FrozenSet[str]


@dataclass(frozen=True)
class LassoWord:
    """Ultimately periodic word prefix · cycle^ω."""

    prefix: Tuple[Letter, ...]
    cycle: Tuple[Letter, ...]

    def __post_init__(self):
        if not self.cycle:
            raise ValidationError("lasso cycle must be non-empty")

    def positions(self) -> int:
        return len(self.prefix) + len(self.cycle)

    def letter(self, t: int) -> Letter:
        """Letter read at lasso position t (t < positions())."""
        if t < len(self.prefix):
            return self.prefix[t]
        return self.cycle[t - len(self.prefix)]

    def next_position(self, t: int) -> int:
        return t + 1 if t + 1 < self.positions() else len(self.prefix)


@dataclass
class BuchiObserver:
    """Nondeterministic Büchi automaton given by a successor rule.

    Successor sets are computed on demand and memoized. `alphabet` holds the
    letters the observer is defined on.
    """

    name: str
    initial: State
    alphabet: Tuple[Letter, ...]
    rule: Callable[[State, Letter], Iterable[State]]
    accepting: Callable[[State], bool]
    max_states: int = 2_000_000
    _succ: Dict[Tuple[State, Letter], FrozenSet[State]] = field(default_factory=dict, repr=False)
    _reachable: Optional[Tuple[State, ...]] = field(default=None, repr=False)

    def successors(self, state: State, letter: Letter) -> FrozenSet[State]:
        key = (state, letter)
        cached = self._succ.get(key)
        if cached is None:
            cached = frozenset(self.rule(state, letter))
            self._succ[key] = cached
        return cached

    def reachable_states(self) -> Tuple[State, ...]:
        """States reachable from the initial state over the alphabet, in BFS order."""
        if self._reachable is None:
            seen = {self.initial}
            order = [self.initial]
            queue = deque(order)
            while queue:
                state = queue.popleft()
                for letter in self.alphabet:
                    for nxt in self.successors(state, letter):
                        if nxt not in seen:
                            seen.add(nxt)
                            order.append(nxt)
                            queue.append(nxt)
                            check_resource_limit(len(seen), self.max_states, self.name)
            self._reachable = tuple(order)
        return self._reachable

    @property
    def state_bound(self) -> int:
        """Number of reachable states; bounds the size of any determinization tree."""
        return len(self.reachable_states())


@dataclass
class ParityObserver:
    """Deterministic max-parity automaton; even priorities accept.

    Transitions are materialized lazily. A complemented observer shares the
    transition structure and shifts every priority by one.
    """

    name: str
    initial: State
    alphabet: Tuple[Letter, ...]
    delta: Callable[[State, Letter], State]
    base_priority: Callable[[State], int]
    complemented: bool = False
    max_states: int = 2_000_000
    _table: Dict[Tuple[State, Letter], State] = field(default_factory=dict, repr=False)
    _seen: set = field(default_factory=set, repr=False)

    def __post_init__(self):
        self._seen.add(self.initial)

    def step(self, state: State, letter: Letter) -> State:
        key = (state, letter)
        nxt = self._table.get(key)
        if nxt is None:
            nxt = self.delta(state, letter)
            self._table[key] = nxt
            if nxt not in self._seen:
                self._seen.add(nxt)
                check_resource_limit(len(self._seen), self.max_states, self.name)
        return nxt

    def priority(self, state: State) -> int:
        return self.base_priority(state) + (1 if self.complemented else 0)

    @property
    def materialized_states(self) -> int:
        return len(self._seen)

    def complement(self) -> "ParityObserver":
        """The observer of the complement language."""
        twin = ParityObserver(
            name=self.name,
            initial=self.initial,
            alphabet=self.alphabet,
            delta=self.delta,
            base_priority=self.base_priority,
            complemented=not self.complemented,
            max_states=self.max_states,
        )
        twin._table = self._table
        twin._seen = self._seen
        return twin

    def explore(self) -> List[State]:
        """Materialize every state reachable over the alphabet, in BFS order."""
        order = [self.initial]
        seen = {self.initial}
        queue = deque(order)
        while queue:
            state = queue.popleft()
            for letter in self.alphabet:
                nxt = self.step(state, letter)
                if nxt not in seen:
                    seen.add(nxt)
                    order.append(nxt)
                    queue.append(nxt)
        return order

    def accepts(self, word: LassoWord) -> bool:
        """Run the lasso until (position, state) repeats and read the cycle's top priority."""
        seen: Dict[Tuple[int, State], int] = {}
        trace: List[int] = []
        t, state = 0, self.initial
        while (t, state) not in seen:
            seen[(t, state)] = len(trace)
            nxt = self.step(state, word.letter(t))
            trace.append(self.priority(nxt))
            t, state = word.next_position(t), nxt
        loop = trace[seen[(t, state)] :]
        return max(loop) % 2 == 0


@dataclass
class BeliefMachine:
    """Knowledge transducer: s₀ = {q_I}, s_{i+1} = post_σ(s_i) ∩ o_{i+1}."""

    arena: Arena

    @property
    def initial(self) -> Belief:
        return frozenset({self.arena.initial})

    def step(self, belief: Belief, action: str, block: int) -> Belief:
        return self.arena.post(belief, action) & self.arena.blocks[block]

    def moves(self, belief: Belief, action: str) -> List[Tuple[int, Belief]]:
        """Blocks Adam may reveal after σ, with the resulting beliefs."""
        post = self.arena.post(belief, action)
        out = []
        for index, block in enumerate(self.arena.blocks):
            nxt = post & block
            if nxt:
                out.append((index, nxt))
        return out

    def reachable(self) -> List[Belief]:
        """Reachable beliefs in BFS order."""
        order = [self.initial]
        seen = set(order)
        queue = deque(order)
        while queue:
            belief = queue.popleft()
            for action in self.arena.action_order:
                for _, nxt in self.moves(belief, action):
                    if nxt not in seen:
                        seen.add(nxt)
                        order.append(nxt)
                        queue.append(nxt)
        return order

    def letters(self) -> Tuple[Tuple[str, int, Belief], ...]:
        """Reachable annotated letters (σ, o, s′)."""
        out = []
        for belief in self.reachable():
            for action in self.arena.action_order:
                for index, nxt in self.moves(belief, action):
                    out.append((action, index, nxt))
        return tuple(dict.fromkeys(out))
