"""Boolean characteristic-set solving with learned variable orderings."""

import json

from ._core import (
    DomainError,
    InputError,
    LoadError,
    Model,
    ParseError,
    System,
    brute_force,
    generate,
    random_ordering,
    spectrum,
)
from . import _core

__all__ = [
    "DomainError",
    "InputError",
    "LoadError",
    "Model",
    "ParseError",
    "System",
    "brute_force",
    "generate",
    "optimize",
    "random_ordering",
    "solve",
    "spectrum",
]


def solve(system, ordering=None, cap=1 << 20, emit_sets=False):
    """Solve `system`, optionally under `ordering` (1-based permutation).

    Returns the solver report as a dict: solutions (bit strings, x1 first),
    truncated, cost counters and, with emit_sets, the triangular sets.
    """
    return json.loads(_core.solve_json(system, ordering, cap, emit_sets))


def optimize(system, model, iterations=500, alpha=0.95, beta=0.5, epsilon=0.1, pool=None, t0=None, seed=0):
    """Anneal a variable ordering for `system` under `model`."""
    return json.loads(_core.optimize_json(system, model, iterations, alpha, beta, epsilon, pool, t0, seed))
