"""Symbolic workbench for multiplicative preprojective algebras.

Reduction systems with certified confluence, exact normal forms in the
localized path algebra and its quotient, and generator-level checks of the
theta map, the bimodule complex and ring-theoretic properties.
"""

from .freeword import Element, Letter, Word, element_mul, format_element
from .presentations import combined_system, cycle_system, partial_system
from .quiver import Quiver, build_doubled, make_quiver, parse_quiver
from .rewrite import check_confluence
from .scalar import LaurentScalar, parse_scalar

__version__ = "0.1.0"

__all__ = [
    "Element",
    "LaurentScalar",
    "Letter",
    "Quiver",
    "Word",
    "build_doubled",
    "check_confluence",
    "combined_system",
    "cycle_system",
    "element_mul",
    "format_element",
    "make_quiver",
    "parse_quiver",
    "parse_scalar",
    "partial_system",
]
