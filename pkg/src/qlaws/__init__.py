"""Algebraic laws, semantics and transformation passes for quantum programs."""

from qlaws.config import DEFAULT, Config
from qlaws.library import Library

__all__ = ["Config", "DEFAULT", "Library"]
__version__ = "0.1.0"
