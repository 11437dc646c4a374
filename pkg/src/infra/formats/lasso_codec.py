"""Inline lasso notation: `{q0} a {q1} b | {q1} a`, prefix before the bar, cycle after it."""
import re
from typing import List, Tuple

from src.domain.errors import ParseError
from src.domain.models import AbstractLasso, LassoStep
from src.infra.formats.wga_codec import format_block

_STEP_RE = re.compile(r"\{([^{}]*)\}\s*([^\s{}|#,]+)")


def _parse_steps(text: str) -> Tuple[LassoStep, ...]:
    steps: List[LassoStep] = []
    position = 0
    text = text.strip()
    while position < len(text):
        match = _STEP_RE.match(text, position)
        if match is None:
            raise ParseError(f"malformed lasso step at '{text[position:]}'", 1)
        members = match.group(1).replace(",", " ").split()
        if not members:
            raise ParseError("empty observation in lasso", 1)
        steps.append((frozenset(members), match.group(2)))
        position = match.end()
        while position < len(text) and text[position].isspace():
            position += 1
    return tuple(steps)


def parse_lasso(text: str) -> AbstractLasso:
    """
    Parse an abstract lasso.

    Args:
        text: `prefix | cycle`; without a bar the whole text is the cycle

    Returns:
        The abstract lasso (not yet checked against an arena)

    Raises:
        ParseError: If the notation is malformed or the cycle is empty
    """
    if text.count("|") > 1:
        raise ParseError("a lasso has at most one '|'", 1)
    prefix_text, cycle_text = text.split("|") if "|" in text else ("", text)
    prefix = _parse_steps(prefix_text)
    cycle = _parse_steps(cycle_text)
    if not cycle:
        raise ParseError("lasso cycle must be non-empty", 1)
    return AbstractLasso(prefix=prefix, cycle=cycle)


def serialize_lasso(lasso: AbstractLasso) -> str:
    def render(steps) -> str:
        return " ".join(f"{format_block(o)} {a}" for o, a in steps)

    return f"{render(lasso.prefix)} | {render(lasso.cycle)}".strip()
