"""Statistical mechanics of surjective cellular automata at desk scale."""

__version__ = "0.1.0"
