"""Parser and serializer for the line-oriented `.wga` arena format.

    states: q0 q1
    init: q0
    alphabet: a b
    obs: {q0} {q1}
    trans: q0 a -1 q1

`#` starts a comment. An optional `scale: k` line records the factor all
weights were multiplied by when the arena was generated.
"""
import re
from typing import Dict, Iterator, List, Tuple

from src.domain.errors import ParseError
from src.domain.models import Arena, Transition

_IDENT = r"[^\s{}#,|]+"
_IDENT_RE = re.compile(rf"^{_IDENT}$")
_BLOCK_RE = re.compile(r"\{([^{}]*)\}")
_INT_RE = re.compile(r"^[+-]?\d+$")

ARENA_KEYS = ("states", "init", "alphabet", "obs", "trans", "scale")


def read_lines(text: str, allowed: Tuple[str, ...]) -> Iterator[Tuple[int, str, str]]:
    """
    Split a keyed text format into (line number, key, value) records.

    Args:
        text: Whole file content
        allowed: Keys accepted by the format

    Yields:
        One record per non-empty line, comments removed

    Raises:
        ParseError: If a line has no key or an unknown key
    """
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ParseError(f"expected 'key: value', got '{line}'", lineno)
        key, value = line.split(":", 1)
        key = key.strip()
        if key not in allowed:
            raise ParseError(f"unknown key '{key}'", lineno)
        yield lineno, key, value.strip()


def identifiers(value: str, lineno: int) -> List[str]:
    """Whitespace separated identifiers of a line."""
    tokens = value.split()
    for token in tokens:
        if not _IDENT_RE.match(token):
            raise ParseError(f"invalid identifier '{token}'", lineno)
    return tokens


def parse_blocks(value: str, lineno: int) -> List[frozenset]:
    """Parse `{a b} {c}` into a list of state sets."""
    rest = _BLOCK_RE.sub("", value).strip()
    if rest:
        raise ParseError(f"unexpected text '{rest}' in observation list", lineno)
    blocks = []
    for match in _BLOCK_RE.finditer(value):
        members = identifiers(match.group(1).replace(",", " "), lineno)
        if not members:
            raise ParseError("empty observation block", lineno)
        blocks.append(frozenset(members))
    if not blocks:
        raise ParseError("no observation block given", lineno)
    return blocks


def parse_transition(value: str, lineno: int) -> Transition:
    """Parse `source action weight target`."""
    parts = value.split()
    if len(parts) != 4:
        raise ParseError("transition needs 'source action weight target'", lineno)
    source, action, weight, target = parts
    identifiers(f"{source} {action} {target}", lineno)
    if not _INT_RE.match(weight):
        raise ParseError(f"weight '{weight}' is not a decimal integer", lineno)
    return Transition(source=source, action=action, weight=int(weight), target=target)


def _single(fields: Dict[str, Tuple[int, str]], key: str, lineno: int, value: str) -> None:
    if key in fields:
        raise ParseError(f"duplicate '{key}' line", lineno)
    fields[key] = (lineno, value)


def parse_arena(text: str) -> Arena:
    """
    Parse a `.wga` document.

    Args:
        text: File content

    Returns:
        The arena, with states, actions, blocks and transitions in canonical order

    Raises:
        ParseError: On syntax errors (with the 1-based line number)
        ValidationError: If the arena violates an invariant
        NotFoundError: If a transition or block names an unknown identifier
    """
    fields: Dict[str, Tuple[int, str]] = {}
    transitions: List[Transition] = []
    for lineno, key, value in read_lines(text, ARENA_KEYS):
        if key == "trans":
            transitions.append(parse_transition(value, lineno))
        else:
            _single(fields, key, lineno, value)

    for key in ("states", "init", "alphabet", "obs"):
        if key not in fields:
            raise ParseError(f"missing '{key}' line")

    states_line, states_value = fields["states"]
    states = identifiers(states_value, states_line)
    alphabet_line, alphabet_value = fields["alphabet"]
    alphabet = identifiers(alphabet_value, alphabet_line)
    init_line, init_value = fields["init"]
    initial = identifiers(init_value, init_line)
    if len(initial) != 1:
        raise ParseError("exactly one initial state expected", init_line)
    blocks = parse_blocks(fields["obs"][1], fields["obs"][0])

    scale = 1
    if "scale" in fields:
        scale_line, scale_value = fields["scale"]
        if not _INT_RE.match(scale_value) or int(scale_value) < 1:
            raise ParseError("scale must be a positive integer", scale_line)
        scale = int(scale_value)

    return canonical_arena(states, initial[0], alphabet, transitions, blocks, scale)


def canonical_arena(
    states, initial: str, alphabet, transitions, blocks, weight_scale: int = 1
) -> Arena:
    """Build an arena with every collection in canonical order."""
    return Arena(
        states=tuple(sorted(states)),
        initial=initial,
        alphabet=tuple(sorted(alphabet)),
        transitions=tuple(sorted(transitions, key=lambda t: (t.source, t.action, t.target))),
        observations=tuple(sorted((frozenset(b) for b in blocks), key=lambda b: sorted(b))),
        weightScale=weight_scale,
    )


def format_block(block) -> str:
    return "{" + " ".join(sorted(block)) + "}"


def serialize_arena(arena: Arena) -> str:
    """
    Render an arena as `.wga` text in canonical order.

    Args:
        arena: The arena

    Returns:
        Text that parse_arena reads back to an equal arena
    """
    lines = [
        f"states: {' '.join(arena.state_order)}",
        f"init: {arena.initial}",
        f"alphabet: {' '.join(arena.action_order)}",
        f"obs: {' '.join(format_block(b) for b in arena.blocks)}",
    ]
    if arena.weightScale != 1:
        lines.append(f"scale: {arena.weightScale}")
    for t in sorted(arena.transitions, key=lambda t: (t.source, t.action, t.target)):
        lines.append(f"trans: {t.source} {t.action} {t.weight} {t.target}")
    return "\n".join(lines) + "\n"
