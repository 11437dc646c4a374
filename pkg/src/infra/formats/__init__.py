"""Text formats for arenas, weighted automata and lassos."""
