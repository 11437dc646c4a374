"""Domain models for weighted game arenas with partial observation."""
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from src.domain.errors import LassoError, NotFoundError, ValidationError

# An observation block paired with the action Eve plays while seeing it
LassoStep = Tuple[FrozenSet[str], str]


class Transition(BaseModel):
    """A weighted transition (q, σ, w, q′) of an arena or weighted automaton."""

    model_config = ConfigDict(frozen=True)

    source: str = Field(..., description="Source state identifier")
    action: str = Field(..., description="Action identifier")
    weight: int = Field(..., description="Integer weight of the transition")
    target: str = Field(..., description="Target state identifier")


class Arena(BaseModel):
    """Weighted game arena with partial observation ⟨Q, q_I, Σ, Δ, w, Obs⟩."""

    model_config = ConfigDict(frozen=True)

    states: Tuple[str, ...] = Field(..., description="State identifiers (Q)")
    initial: str = Field(..., description="Initial state (q_I)")
    alphabet: Tuple[str, ...] = Field(..., description="Action identifiers (Σ)")
    transitions: Tuple[Transition, ...] = Field(..., description="Weighted transitions (Δ, w)")
    observations: Tuple[FrozenSet[str], ...] = Field(
        ..., description="Observation blocks partitioning the states (Obs)"
    )
    weightScale: int = Field(
        1, ge=1, description="Factor all weights were multiplied by when the arena was built"
    )

    _state_order: Tuple[str, ...] = PrivateAttr(default=())
    _action_order: Tuple[str, ...] = PrivateAttr(default=())
    _blocks: Tuple[FrozenSet[str], ...] = PrivateAttr(default=())
    _block_of: Dict[str, int] = PrivateAttr(default_factory=dict)
    _succ: Dict[Tuple[str, str], Tuple[Tuple[str, int], ...]] = PrivateAttr(default_factory=dict)
    _pred: Dict[Tuple[str, str], Tuple[Tuple[str, int], ...]] = PrivateAttr(default_factory=dict)
    _weight: Dict[Tuple[str, str, str], int] = PrivateAttr(default_factory=dict)

    def model_post_init(self, __context) -> None:
        """Check the arena invariants and build the lookup tables."""
        # Unique identifiers
        if len(set(self.states)) != len(self.states):
            raise ValidationError("duplicate state identifier")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValidationError("duplicate action identifier")
        if not self.states:
            raise ValidationError("arena has no states")
        if not self.alphabet:
            raise ValidationError("arena has no actions")
        known_states = set(self.states)
        known_actions = set(self.alphabet)
        if self.initial not in known_states:
            raise NotFoundError(f"initial state '{self.initial}' is not a state")

        # Transition relation and weight function
        succ: Dict[Tuple[str, str], List[Tuple[str, int]]] = {}
        pred: Dict[Tuple[str, str], List[Tuple[str, int]]] = {}
        weight: Dict[Tuple[str, str, str], int] = {}
        for t in self.transitions:
            if t.source not in known_states:
                raise NotFoundError(f"unknown state '{t.source}'")
            if t.target not in known_states:
                raise NotFoundError(f"unknown state '{t.target}'")
            if t.action not in known_actions:
                raise NotFoundError(f"unknown action '{t.action}'")
            key = (t.source, t.action, t.target)
            if key in weight:
                raise ValidationError(
                    f"parallel edges {t.source} -{t.action}-> {t.target}: w must be a function"
                )
            weight[key] = t.weight
            succ.setdefault((t.source, t.action), []).append((t.target, t.weight))
            pred.setdefault((t.target, t.action), []).append((t.source, t.weight))

        state_order = tuple(sorted(self.states))
        action_order = tuple(sorted(self.alphabet))
        for q in state_order:
            for a in action_order:
                if (q, a) not in succ:
                    raise ValidationError(
                        f"transition relation is not total: no move from {q} on {a}"
                    )

        # Observations partition Q
        seen: Dict[str, int] = {}
        blocks = sorted((frozenset(b) for b in self.observations), key=lambda b: sorted(b))
        for index, block in enumerate(blocks):
            if not block:
                raise ValidationError("observations are not a partition: empty block")
            for q in block:
                if q not in known_states:
                    raise NotFoundError(f"unknown state '{q}' in observation")
                if q in seen:
                    raise ValidationError(f"observations are not a partition: {q} in two blocks")
                seen[q] = index
        if len(seen) != len(known_states):
            missing = sorted(known_states - set(seen))
            raise ValidationError(f"observations are not a partition: {missing} not covered")
        if len(blocks) > 1 and blocks[seen[self.initial]] != frozenset({self.initial}):
            raise ValidationError("initial observation not singleton")

        self._state_order = state_order
        self._action_order = action_order
        self._blocks = tuple(blocks)
        self._block_of = seen
        self._succ = {k: tuple(sorted(v)) for k, v in succ.items()}
        self._pred = {k: tuple(sorted(v)) for k, v in pred.items()}
        self._weight = weight

    @property
    def state_order(self) -> Tuple[str, ...]:
        """States in canonical (lexicographic) order."""
        return self._state_order

    @property
    def action_order(self) -> Tuple[str, ...]:
        """Actions in canonical (lexicographic) order."""
        return self._action_order

    @property
    def blocks(self) -> Tuple[FrozenSet[str], ...]:
        """Observation blocks in canonical order; a block is referred to by its index."""
        return self._blocks

    @property
    def max_abs_weight(self) -> int:
        """W = max |w(t)| over Δ."""
        return max(abs(t.weight) for t in self.transitions)

    @property
    def is_blind(self) -> bool:
        return len(self._blocks) == 1

    def block_of(self, state: str) -> int:
        """Index of the observation block containing a state."""
        try:
            return self._block_of[state]
        except KeyError:
            raise NotFoundError(f"unknown state '{state}'")

    def block_index(self, observation: Iterable[str]) -> int:
        """Index of an observation given by its members."""
        block = frozenset(observation)
        for index, candidate in enumerate(self._blocks):
            if candidate == block:
                return index
        raise NotFoundError(f"unknown observation {{{' '.join(sorted(block))}}}")

    def successors(self, state: str, action: str) -> Tuple[Tuple[str, int], ...]:
        """(target, weight) pairs of the σ-moves leaving a state."""
        return self._succ[(state, action)]

    def predecessors(self, state: str, action: str) -> Tuple[Tuple[str, int], ...]:
        """(source, weight) pairs of the σ-moves entering a state."""
        return self._pred.get((state, action), ())

    def weight(self, source: str, action: str, target: str) -> int:
        return self._weight[(source, action, target)]

    def has_edge(self, source: str, action: str, target: str) -> bool:
        return (source, action, target) in self._weight

    def post(self, source: Iterable[str], action: str) -> FrozenSet[str]:
        """σ-successors of a set of states."""
        return frozenset(q2 for q in source for q2, _ in self._succ[(q, action)])


class ConcretePath(BaseModel):
    """A finite or ultimately periodic concrete path q₀σ₀q₁σ₁…"""

    model_config = ConfigDict(frozen=True)

    states: Tuple[str, ...] = Field(..., min_length=1, description="Visited states q₀…q_n")
    actions: Tuple[str, ...] = Field(default=(), description="Actions σ₀…σ_{n-1}")
    cycleStart: Optional[int] = Field(
        None, description="Index k with q_n = q_k when the path repeats from k forever"
    )

    @model_validator(mode="after")
    def check_shape(self) -> "ConcretePath":
        """Validate the interleaving and the cycle closure."""
        if len(self.states) != len(self.actions) + 1:
            raise ValueError("a path has one more state than actions")
        if self.cycleStart is not None:
            if not 0 <= self.cycleStart < len(self.actions):
                raise ValueError("cycle start must index a transition of the path")
            if self.states[self.cycleStart] != self.states[-1]:
                raise ValueError("cycle does not close")
        return self

    @property
    def is_lasso(self) -> bool:
        return self.cycleStart is not None

    def transition_count(self) -> int:
        return len(self.actions)

    def step(self, i: int) -> Tuple[str, str, str]:
        """The i-th transition (q_i, σ_i, q_{i+1}); lassos are unrolled on demand."""
        n = len(self.actions)
        if i < n:
            return self.states[i], self.actions[i], self.states[i + 1]
        if self.cycleStart is None:
            raise IndexError(f"transition {i} is beyond a finite path of {n} transitions")
        period = n - self.cycleStart
        j = self.cycleStart + (i - self.cycleStart) % period
        return self.states[j], self.actions[j], self.states[j + 1]


class AbstractPath(BaseModel):
    """Finite abstract path o₀σ₀o₁…o_n."""

    model_config = ConfigDict(frozen=True)

    observations: Tuple[FrozenSet[str], ...] = Field(..., min_length=1)
    actions: Tuple[str, ...] = ()

    @model_validator(mode="after")
    def check_shape(self) -> "AbstractPath":
        """Validate the interleaving."""
        if len(self.observations) != len(self.actions) + 1:
            raise ValueError("an abstract path has one more observation than actions")
        return self


class AbstractLasso(BaseModel):
    """Ultimately periodic abstract play: prefix then cycle of (observation, action) pairs."""

    model_config = ConfigDict(frozen=True)

    prefix: Tuple[LassoStep, ...] = Field(default=(), description="Steps played once")
    cycle: Tuple[LassoStep, ...] = Field(..., description="Steps repeated forever")

    @field_validator("cycle")
    @classmethod
    def cycle_non_empty(cls, v: Tuple[LassoStep, ...]) -> Tuple[LassoStep, ...]:
        """Validate that the cycle is non-empty."""
        if not v:
            raise ValueError("lasso cycle must be non-empty")
        return v

    @property
    def steps(self) -> Tuple[LassoStep, ...]:
        return self.prefix + self.cycle

    def step(self, i: int) -> LassoStep:
        """The i-th (observation, action) pair of the unrolled play."""
        if i < len(self.prefix):
            return self.prefix[i]
        return self.cycle[(i - len(self.prefix)) % len(self.cycle)]

    def unroll(self, length: int) -> AbstractPath:
        """The abstract prefix o₀σ₀…o_length of the play."""
        steps = [self.step(i) for i in range(length + 1)]
        return AbstractPath(
            observations=tuple(o for o, _ in steps),
            actions=tuple(a for _, a in steps[:-1]),
        )

    def positions(self) -> int:
        """Number of distinct lasso positions."""
        return len(self.prefix) + len(self.cycle)

    def next_position(self, t: int) -> int:
        """Successor of a lasso position; the last one loops back to the cycle start."""
        return t + 1 if t + 1 < self.positions() else len(self.prefix)

    def block_indices(self, arena: Arena) -> Tuple[Tuple[int, str], ...]:
        """Steps with observations replaced by block indices of the arena.

        Raises:
            LassoError: If an observation or action does not belong to the arena
        """
        resolved = []
        for observation, action in self.steps:
            if action not in arena.alphabet:
                raise LassoError(f"unknown action '{action}' in lasso")
            try:
                resolved.append((arena.block_index(observation), action))
            except NotFoundError as e:
                raise LassoError(str(e))
        return tuple(resolved)


class ObjectiveKind(str, Enum):
    """Window objectives and the reference mean-payoff objectives."""

    DIRFIX = "dirfix"
    UFIX = "ufix"
    FIX = "fix"
    UDIRBND = "udirbnd"
    DIRBND = "dirbnd"
    UBND = "ubnd"
    BND = "bnd"
    MPINF = "mpinf"
    MPSUP = "mpsup"


class Objective(BaseModel):
    """An objective kind with its window bound and threshold ν = a/b."""

    model_config = ConfigDict(frozen=True)

    kind: ObjectiveKind = Field(..., description="Objective kind")
    lmax: Optional[int] = Field(None, ge=1, description="Window bound for fixed window kinds")
    numerator: int = Field(0, description="Threshold numerator a")
    denominator: int = Field(1, ge=1, description="Threshold denominator b")

    @model_validator(mode="after")
    def check_window_bound(self) -> "Objective":
        """Fixed window kinds carry lmax, bounded window kinds quantify it away."""
        fixed = self.kind in (ObjectiveKind.DIRFIX, ObjectiveKind.UFIX, ObjectiveKind.FIX)
        bounded = self.kind in (
            ObjectiveKind.UDIRBND,
            ObjectiveKind.DIRBND,
            ObjectiveKind.UBND,
            ObjectiveKind.BND,
        )
        if fixed and self.lmax is None:
            raise ValueError(f"{self.kind.value} requires lmax")
        if bounded and self.lmax is not None:
            raise ValueError(f"{self.kind.value} takes no lmax")
        return self

    @property
    def threshold(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)


class MooreStrategy(BaseModel):
    """Finite-memory observation-based strategy ⟨M, m₀, α_u, α_o⟩.

    Observations are referred to by the canonical block index of the arena.
    """

    memory: Tuple[str, ...] = Field(..., min_length=1, description="Memory states M")
    initialMemory: str = Field(..., description="Initial memory state m₀")
    update: Dict[str, Dict[int, str]] = Field(..., description="α_u: M × Obs → M")
    output: Dict[str, Dict[int, str]] = Field(..., description="α_o: M × Obs → Σ")

    @model_validator(mode="after")
    def check_memory(self) -> "MooreStrategy":
        """Validate that the maps are defined on every memory state."""
        if self.initialMemory not in self.memory:
            raise ValueError("initial memory is not a memory state")
        for m in self.memory:
            if m not in self.update or m not in self.output:
                raise ValueError(f"memory state '{m}' has no update or output")
            for target in self.update[m].values():
                if target not in self.memory:
                    raise ValueError(f"update leads to unknown memory state '{target}'")
        return self

    def minimize(self) -> "MooreStrategy":
        """
        Merge memory states that no sequence of observations can tell apart.

        Partition refinement over (outputs, classes of the updated memory);
        each class keeps its first member in memory order as representative.

        Returns:
            An equivalent strategy with the fewest memory states
        """
        blocks = sorted({o for m in self.memory for o in (*self.output[m], *self.update[m])})
        cls = self._classes(
            {m: tuple(self.output[m].get(o) for o in blocks) for m in self.memory}
        )
        while True:
            refined = self._classes(
                {
                    m: (cls[m],) + tuple(cls.get(self.update[m].get(o)) for o in blocks)
                    for m in self.memory
                }
            )
            if len(set(refined.values())) == len(set(cls.values())):
                break
            cls = refined

        representative: Dict[int, str] = {}
        for m in self.memory:
            representative.setdefault(cls[m], m)
        kept = tuple(representative.values())
        return MooreStrategy(
            memory=kept,
            initialMemory=representative[cls[self.initialMemory]],
            update={
                m: {o: representative[cls[target]] for o, target in self.update[m].items()}
                for m in kept
            },
            output={m: dict(self.output[m]) for m in kept},
        )

    def _classes(self, signature: Dict[str, Tuple]) -> Dict[str, int]:
        """Number signatures by first appearance in memory order."""
        numbering: Dict[Tuple, int] = {}
        return {m: numbering.setdefault(signature[m], len(numbering)) for m in self.memory}


class Winner(str, Enum):
    """Winner of a game from its initial vertex."""

    EVE = "eve"
    ADAM = "adam"


class WindowVerdict(BaseModel):
    """Outcome of the good-window test at one position of a path."""

    position: int = Field(..., ge=0, description="Window start i")
    lmax: int = Field(..., ge=1, description="Window bound")
    closedAt: Optional[int] = Field(None, description="Smallest closing length j, if any")
    witness: Tuple[str, ...] = Field(..., description="States of the inspected segment")

    @property
    def is_closed(self) -> bool:
        return self.closedAt is not None


class LassoVerdict(BaseModel):
    """Membership of an abstract lasso in an objective, with a violation witness."""

    kind: ObjectiveKind
    lmax: Optional[int] = None
    member: bool
    violationPosition: Optional[int] = Field(
        None, description="Start position of a violating window (window kinds)"
    )
    witness: Optional[ConcretePath] = Field(
        None, description="Concretization segment witnessing the violation"
    )


class MpCertificate(BaseModel):
    """Result of checking that a finite-memory strategy has mean payoff above ε."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    certified: bool
    epsilon: Fraction
    mu: Optional[int] = Field(None, description="Window bound the strategy wins DirFix for")
    cycle: Tuple[Tuple[str, str], ...] = Field(
        default=(), description="(state, memory) cycle with mean below ε when refuted"
    )
    cycleMean: Optional[Fraction] = None
    productSize: int = Field(0, ge=0, description="Reachable (state, memory) pairs")


class RunReport(BaseModel):
    """Summary of one solver run."""

    arenaName: str
    states: int
    actions: int
    observations: int
    maxAbsWeight: int
    objective: ObjectiveKind
    lmax: int
    threshold: str = "0"
    engine: str
    winner: Winner
    strategySize: Optional[int] = None
    wallTime: float = Field(..., ge=0)
    counts: Dict[str, int] = Field(default_factory=dict)


class WeightedAutomaton(BaseModel):
    """Weighted finite automaton ⟨Q, q_I, Σ, Δ, w, F⟩ over finite words."""

    model_config = ConfigDict(frozen=True)

    states: Tuple[str, ...] = Field(..., min_length=1)
    initial: str
    alphabet: Tuple[str, ...] = Field(..., min_length=1)
    transitions: Tuple[Transition, ...] = ()
    final: FrozenSet[str] = frozenset()

    @model_validator(mode="after")
    def check_identifiers(self) -> "WeightedAutomaton":
        """Validate identifiers of the automaton."""
        states = set(self.states)
        if len(states) != len(self.states):
            raise ValueError("duplicate state identifier")
        if self.initial not in states:
            raise ValueError(f"initial state '{self.initial}' is not a state")
        if not self.final <= states:
            raise ValueError("final states must be states")
        for t in self.transitions:
            if t.source not in states or t.target not in states:
                raise ValueError(f"transition {t.source} -> {t.target} uses an unknown state")
            if t.action not in self.alphabet:
                raise ValueError(f"transition uses unknown letter '{t.action}'")
        return self


class SafetySpec(BaseModel):
    """Imperfect-information safety game: an arena whose weights are ignored plus unsafe states."""

    model_config = ConfigDict(frozen=True)

    arena: Arena
    unsafe: FrozenSet[str] = frozenset()

    def model_post_init(self, __context) -> None:
        """Unsafe states must exist and be trapping."""
        for u in self.unsafe:
            if u not in self.arena.states:
                raise NotFoundError(f"unknown unsafe state '{u}'")
            for t in self.arena.transitions:
                if t.source == u and t.target != u:
                    raise ValidationError(f"unsafe state '{u}' is not trapping")
