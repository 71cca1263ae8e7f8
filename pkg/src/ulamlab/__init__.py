"""Numerical experiments on Ulam stability of groups."""

from .errors import BoundViolation, UlamError, UsageError
from .groups import FiniteGroup, build_group, coset_system, quotient
from .quasirep import FreeDomain, QuasiRep, defect, uniform_distance
from .words import FreeWord, enumerate_ball

__all__ = [
    "BoundViolation",
    "FiniteGroup",
    "FreeDomain",
    "FreeWord",
    "QuasiRep",
    "UlamError",
    "UsageError",
    "build_group",
    "coset_system",
    "defect",
    "enumerate_ball",
    "quotient",
    "uniform_distance",
]

__version__ = "0.1.0"
