"""DOT and HOA rendering of arenas, games and observers."""
from typing import Dict, Hashable, List, Optional

from src.domain.automata import ParityObserver
from src.domain.games import ParityGame, SafetyGame
from src.domain.models import Arena
from src.infra.templates import TemplateLoader


def _belief_label(belief) -> str:
    return "{" + ",".join(sorted(belief)) + "}"


def _letter_label(letter) -> str:
    if isinstance(letter, tuple):
        return " ".join(
            _belief_label(part) if isinstance(part, frozenset) else str(part) for part in letter
        )
    return str(letter)


class DotBuilder:
    """Builds graph dumps from the templates in assets/templates."""

    def arena(self, arena: Arena, name: str = "arena") -> str:
        """
        Render an arena: dashed clusters per observation block, edges labelled "σ,w".

        Args:
            arena: The arena
            name: Graph name

        Returns:
            DOT text
        """
        return TemplateLoader.render(
            "arena.dot.j2",
            name=name,
            arena=arena,
            blocks=[sorted(block) for block in arena.blocks],
            transitions=sorted(arena.transitions, key=lambda t: (t.source, t.action, t.target)),
        )

    def safety_game(self, game: SafetyGame, winning: Optional[frozenset] = None) -> str:
        """Render G′ with unsafe vertices doubled in red and Eve's winning vertices bold."""
        index = game.index
        vertices = [
            {
                "index": index[f],
                "label": str(f),
                "unsafe": f in game.unsafe,
                "winning": winning is not None and f in winning,
            }
            for f in game.vertices
        ]
        edges = [
            {"source": index[f], "target": index[g], "action": action, "block": block}
            for f in game.vertices
            for action, succ in game.moves.get(f, {}).items()
            for block, g in succ
        ]
        return TemplateLoader.render(
            "safety_game.dot.j2", game=game, vertices=vertices, edges=edges
        )

    def parity_game(
        self, game: ParityGame, regions: Optional[tuple] = None
    ) -> str:
        """
        Render a product game: Eve vertices as circles, Adam vertices as boxes.

        Observer states are numbered in discovery order to keep labels short.
        """
        index = {v: i for i, v in enumerate(game.vertices)}
        observer_ids: Dict[Hashable, int] = {}
        vertices = []
        for v in game.vertices:
            belief, d = v[0], v[1]
            d_id = observer_ids.setdefault(d, len(observer_ids))
            label = f"{_belief_label(belief)} d{d_id}"
            if len(v) == 3:
                label += f" {v[2]}"
            winner = None
            if regions is not None:
                winner = 0 if v in regions[0] else 1
            vertices.append(
                {
                    "index": index[v],
                    "owner": game.owner[v],
                    "priority": game.priority[v],
                    "label": label,
                    "winner": winner,
                }
            )
        edges = [
            {"source": index[v], "target": index[u]} for v in game.vertices for u in game.edges[v]
        ]
        return TemplateLoader.render("parity_game.dot.j2", vertices=vertices, edges=edges)

    def observer(self, observer: ParityObserver) -> str:
        """HOA-like dump of a deterministic parity observer over its reachable states."""
        states = observer.explore()
        index = {s: i for i, s in enumerate(states)}
        letters: List[Hashable] = list(observer.alphabet)
        letter_index = {letter: i for i, letter in enumerate(letters)}
        rendered = []
        for s in states:
            rendered.append(
                {
                    "index": index[s],
                    "priority": observer.priority(s),
                    "label": repr(s)[:120],
                    "edges": [
                        {"letter": letter_index[letter], "target": index[observer.step(s, letter)]}
                        for letter in letters
                    ],
                }
            )
        return TemplateLoader.render(
            "observer.hoa.j2",
            name=observer.name,
            states=rendered,
            letters=[_letter_label(letter) for letter in letters],
            max_priority=max((s["priority"] for s in rendered), default=0),
        )
