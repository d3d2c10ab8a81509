"""Exact Shannon outer-bound LP for tiny caching instances."""

from .model import (
    MAX_VARIABLES,
    Constraint,
    EntropyLpModel,
    build_model,
    elemental_inequalities,
)
from .simplex import LpError, maximize, minimize
from .solve import LpSolution, presolve, solve

__all__ = [
    "MAX_VARIABLES",
    "Constraint",
    "EntropyLpModel",
    "LpError",
    "LpSolution",
    "build_model",
    "elemental_inequalities",
    "maximize",
    "minimize",
    "presolve",
    "solve",
]
