"""Parser and serializer for the `.wfa` weighted automaton format.

Same layout as `.wga` without `obs:`, plus a `final:` line. Transitions
need not be total.
"""
from typing import Dict, List, Tuple

from pydantic import ValidationError as PydanticValidationError

from src.domain.errors import ParseError, ValidationError
from src.domain.models import Transition, WeightedAutomaton
from src.infra.formats.wga_codec import identifiers, parse_transition, read_lines

AUTOMATON_KEYS = ("states", "init", "alphabet", "final", "trans")


def parse_automaton(text: str) -> WeightedAutomaton:
    """
    Parse a `.wfa` document.

    Args:
        text: File content

    Returns:
        The weighted automaton

    Raises:
        ParseError: On syntax errors
        ValidationError: If identifiers are inconsistent
    """
    fields: Dict[str, Tuple[int, str]] = {}
    transitions: List[Transition] = []
    for lineno, key, value in read_lines(text, AUTOMATON_KEYS):
        if key == "trans":
            transitions.append(parse_transition(value, lineno))
        elif key in fields:
            raise ParseError(f"duplicate '{key}' line", lineno)
        else:
            fields[key] = (lineno, value)

    for key in ("states", "init", "alphabet"):
        if key not in fields:
            raise ParseError(f"missing '{key}' line")
    parsed = {key: identifiers(value, lineno) for key, (lineno, value) in fields.items()}
    if len(parsed["init"]) != 1:
        raise ParseError("exactly one initial state expected", fields["init"][0])

    try:
        return WeightedAutomaton(
            states=tuple(sorted(parsed["states"])),
            initial=parsed["init"][0],
            alphabet=tuple(sorted(parsed["alphabet"])),
            transitions=tuple(sorted(transitions, key=lambda t: (t.source, t.action, t.target))),
            final=frozenset(parsed.get("final", ())),
        )
    except PydanticValidationError as e:
        raise ValidationError(f"invalid weighted automaton: {e.errors()[0]['msg']}")


def serialize_automaton(automaton: WeightedAutomaton) -> str:
    """Render a weighted automaton as `.wfa` text."""
    lines = [
        f"states: {' '.join(sorted(automaton.states))}",
        f"init: {automaton.initial}",
        f"alphabet: {' '.join(sorted(automaton.alphabet))}",
        f"final: {' '.join(sorted(automaton.final))}",
    ]
    for t in automaton.transitions:
        lines.append(f"trans: {t.source} {t.action} {t.weight} {t.target}")
    return "\n".join(lines) + "\n"
