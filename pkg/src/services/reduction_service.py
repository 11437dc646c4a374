"""Reduction Service: safety games, weighted automata and the undecidability gadgets."""
import itertools
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from src.domain.automata import BeliefMachine
from src.domain.errors import ValidationError
from src.domain.models import (
    AbstractLasso,
    Arena,
    LassoVerdict,
    MooreStrategy,
    MpCertificate,
    Objective,
    ObjectiveKind,
    SafetySpec,
    Transition,
    WeightedAutomaton,
    Winner,
)
from src.infra.formats.wga_codec import canonical_arena
from src.services.oracle_service import OracleService

logger = logging.getLogger(__name__)

# Separator letter of the gadgets; `#` starts comments in .wga files
SEPARATOR = "hash"

# Gadget weights are doubled so that the half-unit edges stay integral
GADGET_SCALE = 2

BOTTOM = "bot"
GADGET_INIT = "init"


@dataclass(frozen=True)
class UniversalityResult:
    """Bounded universality check of a weighted automaton."""

    universal: bool
    counterexample: Optional[Tuple[str, ...]] = None
    cost: Optional[int] = None


@dataclass(frozen=True)
class SeparatorCertificate:
    """A blind separator strategy on the simulation gadget, certified by mean payoff."""

    word: Tuple[str, ...]
    strategy: MooreStrategy
    certificate: MpCertificate
    lassos_checked: int
    dirfix_confirmed: bool


class ReductionService:
    """Service for reductions between safety, window and weighted-automaton problems."""

    def __init__(self, oracle_service: Optional[OracleService] = None):
        """Initialize the reduction service."""
        self.oracle_service = oracle_service or OracleService()

    # Weighted automata

    def wfa_cost(self, automaton: WeightedAutomaton, word: Sequence[str]) -> Optional[int]:
        """
        Minimal weight of an accepting run on a finite word.

        Args:
            automaton: Weighted automaton
            word: Letters of the word

        Returns:
            The cost, or None if the word has no accepting run

        Raises:
            ValidationError: If a letter is not in the alphabet
        """
        moves: Dict[Tuple[str, str], List[Tuple[str, int]]] = {}
        for t in automaton.transitions:
            moves.setdefault((t.source, t.action), []).append((t.target, t.weight))
        costs = {automaton.initial: 0}
        for letter in word:
            if letter not in automaton.alphabet:
                raise ValidationError(f"letter '{letter}' is not in the alphabet")
            nxt: Dict[str, int] = {}
            for q, c in costs.items():
                for q2, w in moves.get((q, letter), ()):
                    if q2 not in nxt or c + w < nxt[q2]:
                        nxt[q2] = c + w
            costs = nxt
            if not costs:
                return None
        final = [c for q, c in costs.items() if q in automaton.final]
        return min(final) if final else None

    def is_universal_bounded(
        self, automaton: WeightedAutomaton, max_length: int
    ) -> UniversalityResult:
        """
        Check "every word has cost < 0" on all words up to a length, in length-lexicographic order.

        A word without accepting run has no cost and does not count against universality.

        Args:
            automaton: Weighted automaton
            max_length: Longest word length tried (the empty word included)

        Returns:
            Universal, or the first counterexample with its cost
        """
        letters = sorted(automaton.alphabet)
        for length in range(max_length + 1):
            for word in itertools.product(letters, repeat=length):
                cost = self.wfa_cost(automaton, word)
                if cost is not None and cost >= 0:
                    return UniversalityResult(universal=False, counterexample=word, cost=cost)
        return UniversalityResult(universal=True)

    # Safety

    def safety_to_dirfix(self, spec: SafetySpec) -> Arena:
        """
        Weight an arena for DirFix: -1 on transitions leaving unsafe states, 0 elsewhere.

        The DirFix winner is then the safety winner for every lmax.
        """
        arena = spec.arena
        transitions = [
            Transition(
                source=t.source,
                action=t.action,
                weight=-1 if t.source in spec.unsafe else 0,
                target=t.target,
            )
            for t in arena.transitions
        ]
        return canonical_arena(
            arena.states, arena.initial, arena.alphabet, transitions, arena.observations
        )

    def solve_safety_spec(self, spec: SafetySpec) -> Winner:
        """
        Solve an imperfect-information safety game on knowledge sets.

        A knowledge set meeting an unsafe state is losing; Adam attracts through
        his choice of observation.
        """
        machine = BeliefMachine(spec.arena)
        beliefs = machine.reachable()
        moves = {
            s: {a: [nxt for _, nxt in machine.moves(s, a)] for a in spec.arena.action_order}
            for s in beliefs
        }
        losing = {s for s in beliefs if s & spec.unsafe}
        changed = True
        while changed:
            changed = False
            for s in beliefs:
                if s in losing:
                    continue
                if all(any(t in losing for t in moves[s][a]) for a in moves[s]):
                    losing.add(s)
                    changed = True
        return Winner.ADAM if machine.initial in losing else Winner.EVE

    # Gadgets

    def _check_separator(self, automaton: WeightedAutomaton) -> None:
        if SEPARATOR in automaton.alphabet:
            raise ValidationError(f"alphabet clash: '{SEPARATOR}' is reserved for the separator")

    def _automaton_part(
        self, automaton: WeightedAutomaton, transitions: List[Transition]
    ) -> Tuple[List[str], str]:
        """Copy of the automaton, completed to ⊥, with separator edges back to its start."""

        def rename(q: str) -> str:
            return f"n_{q}"

        states = [rename(q) for q in automaton.states]
        initial = rename(automaton.initial)
        defined = set()
        for t in automaton.transitions:
            transitions.append(
                Transition(
                    source=rename(t.source),
                    action=t.action,
                    weight=GADGET_SCALE * t.weight,
                    target=rename(t.target),
                )
            )
            defined.add((t.source, t.action))
        for q in automaton.states:
            source = rename(q)
            for letter in automaton.alphabet:
                if (q, letter) not in defined:
                    transitions.append(
                        Transition(source=source, action=letter, weight=0, target=BOTTOM)
                    )
            # Accepted blocks pay half a unit and restart the automaton
            if q in automaton.final:
                separator = Transition(source=source, action=SEPARATOR, weight=1, target=initial)
            else:
                separator = Transition(source=source, action=SEPARATOR, weight=0, target=BOTTOM)
            transitions.append(separator)
        for letter in list(automaton.alphabet) + [SEPARATOR]:
            transitions.append(
                Transition(source=BOTTOM, action=letter, weight=GADGET_SCALE, target=BOTTOM)
            )
        return states + [BOTTOM], initial

    def universality_gadget(self, automaton: WeightedAutomaton) -> Arena:
        """
        Blind arena where Eve wins the bounded window objectives iff the automaton is not universal.

        Weights are doubled (weightScale 2). Adam picks one of three gadgets
        from the initial state: the first punishes running out of separators,
        the second punishes long separator gaps and the third runs the
        automaton on each separated block, paying half a unit on accepting
        blocks and falling to the positive sink otherwise.

        Raises:
            ValidationError: If the alphabet already uses the separator letter
        """
        self._check_separator(automaton)
        sigma = list(automaton.alphabet)
        letters = sigma + [SEPARATOR]
        s = GADGET_SCALE

        def edge(source, action, weight, target):
            return Transition(source=source, action=action, weight=weight, target=target)

        transitions: List[Transition] = []
        for a in letters:
            transitions.append(edge("q1", a, 0, "q1"))
            transitions.append(edge("q4", a, 0, "q4"))
            for target in ("q1", "q4", "q5"):
                transitions.append(edge(GADGET_INIT, a, 0, target))
        for a in sigma:
            transitions.append(edge("q1", a, -s, "q2"))
            transitions.append(edge("q2", a, -s, "q2"))
            transitions.append(edge("q3", a, s, "q3"))
            transitions.append(edge("q5", a, 0, "q5"))
        transitions.append(edge("q2", SEPARATOR, s, "q3"))
        transitions.append(edge("q3", SEPARATOR, s, "q3"))
        transitions.append(edge("q4", SEPARATOR, -s, "q5"))
        transitions.append(edge("q5", SEPARATOR, s, "q4"))

        automaton_states, automaton_initial = self._automaton_part(automaton, transitions)
        transitions.append(edge("q5", SEPARATOR, 1, automaton_initial))

        states = [GADGET_INIT, "q1", "q2", "q3", "q4", "q5"] + automaton_states
        logger.debug("universality gadget: %d states", len(states))
        return canonical_arena(
            tuple(states),
            GADGET_INIT,
            tuple(letters),
            transitions,
            (frozenset(states),),
            GADGET_SCALE,
        )

    def simulation_gadget(self, automaton: WeightedAutomaton) -> Arena:
        """
        Blind arena of the third gadget alone.

        q5 loops on the letters and enters the automaton on the separator.

        Raises:
            ValidationError: If the alphabet already uses the separator letter
        """
        self._check_separator(automaton)
        transitions: List[Transition] = [
            Transition(source="q5", action=a, weight=0, target="q5") for a in automaton.alphabet
        ]
        automaton_states, automaton_initial = self._automaton_part(automaton, transitions)
        transitions.append(
            Transition(source="q5", action=SEPARATOR, weight=1, target=automaton_initial)
        )
        states = ["q5"] + automaton_states
        return canonical_arena(
            tuple(states),
            "q5",
            tuple(automaton.alphabet) + (SEPARATOR,),
            transitions,
            (frozenset(states),),
            GADGET_SCALE,
        )

    def separator_strategy(self, arena: Arena, word: Sequence[str]) -> MooreStrategy:
        """The blind strategy playing (separator · word)^ω."""
        if not word:
            raise ValidationError("separator strategy needs a non-empty word")
        plays = [SEPARATOR] + list(word)
        names = [f"m{i}" for i in range(len(plays))]
        blocks = range(len(arena.blocks))
        return MooreStrategy(
            memory=tuple(names),
            initialMemory=names[0],
            update={
                m: {o: names[(i + 1) % len(names)] for o in blocks} for i, m in enumerate(names)
            },
            output={m: {o: plays[i] for o in blocks} for i, m in enumerate(names)},
        )

    def certify_separator_strategy(
        self, automaton: WeightedAutomaton, word: Sequence[str], max_length: Optional[int] = None
    ) -> SeparatorCertificate:
        """
        Certify the strategy (separator · word)^ω on the simulation gadget.

        Every consistent cycle must have mean at least 1/b with b = |word| + 1
        (in doubled units). The DirFix(μ) claim of the certificate is then
        confirmed by the oracle on all consistent lassos up to |M|·|Q|.

        Args:
            automaton: Weighted automaton
            word: Non-empty word of the alphabet
            max_length: Bound on enumerated lassos, |M|·|Q| by default

        Returns:
            The strategy, its mean-payoff certificate and the oracle confirmation
        """
        arena = self.simulation_gadget(automaton)
        strategy = self.separator_strategy(arena, word)
        epsilon = Fraction(1, len(word) + 1)
        certificate = self.oracle_service.verify_mp_strategy(arena, strategy, epsilon)
        checked = 0
        confirmed = certificate.certified
        if certificate.certified:
            bound = max_length or len(strategy.memory) * len(arena.states)
            objective = Objective(kind=ObjectiveKind.DIRFIX, lmax=certificate.mu)
            for lasso in self.oracle_service.consistent_lassos(arena, strategy, bound):
                checked += 1
                if not self.oracle_service.check_lasso(arena, lasso, objective).member:
                    confirmed = False
                    break
        return SeparatorCertificate(
            word=tuple(word),
            strategy=strategy,
            certificate=certificate,
            lassos_checked=checked,
            dirfix_confirmed=confirmed,
        )

    def gap_window_demo(
        self, automaton: WeightedAutomaton, gap: int, letter: Optional[str] = None
    ) -> Tuple[AbstractLasso, LassoVerdict]:
        """
        A blind lasso with separators `gap` letters apart leaves a window of length gap+1 open.

        Returns:
            The lasso (separator · letter^gap)^ω and its DirFix(gap+1) verdict
            on the universality gadget
        """
        if gap < 1:
            raise ValidationError("gap must be at least 1")
        arena = self.universality_gadget(automaton)
        letter = letter or sorted(automaton.alphabet)[0]
        block = arena.blocks[0]
        lasso = AbstractLasso(prefix=(), cycle=((block, SEPARATOR),) + ((block, letter),) * gap)
        verdict = self.oracle_service.check_lasso(
            arena, lasso, Objective(kind=ObjectiveKind.DIRFIX, lmax=gap + 1)
        )
        return lasso, verdict

    def hash_starvation_demo(
        self, automaton: WeightedAutomaton, lmax: int, letter: Optional[str] = None
    ) -> Tuple[AbstractLasso, LassoVerdict]:
        """
        A blind lasso that stops playing separators violates Fix(lmax) on the universality gadget.

        Returns:
            The lasso separator · letter^ω and its Fix(lmax) verdict
        """
        arena = self.universality_gadget(automaton)
        letter = letter or sorted(automaton.alphabet)[0]
        block = arena.blocks[0]
        lasso = AbstractLasso(prefix=((block, SEPARATOR),), cycle=((block, letter),))
        verdict = self.oracle_service.check_lasso(
            arena, lasso, Objective(kind=ObjectiveKind.FIX, lmax=lmax)
        )
        return lasso, verdict
