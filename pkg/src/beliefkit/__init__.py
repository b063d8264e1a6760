"""Belief-function calculus and imprecise-probability solvers."""

from .errors import BeliefError
from .frames import Frame, MassFunction

__version__ = "0.1.0"

__all__ = ["BeliefError", "Frame", "MassFunction", "__version__"]
