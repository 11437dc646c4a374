"""
Window Games
Entry point for the command-line solver.
"""
import sys

from src.cli import main

if __name__ == "__main__":
    sys.exit(main())
