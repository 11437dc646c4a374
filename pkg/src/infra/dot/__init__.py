"""Graph and automaton dumps rendered from templates."""
