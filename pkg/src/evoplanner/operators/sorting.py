"""Constraint-handling sort strategies with iteration schedules."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..evaluation import violation_total
from ..exceptions import ConfigError, InvalidSpecError
from .population import rank_order

PENALTY = "Penalty"
NON_DOMINATED = "NonDominated"
ALPHA_LEVEL = "AlphaLevel"
VIOLATION_COUNT = "ViolationCount"
STRATEGIES = (PENALTY, NON_DOMINATED, ALPHA_LEVEL, VIOLATION_COUNT)


@dataclass(frozen=True)
class SortOrder:
    permutation: np.ndarray
    strategy: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=int)
        if not np.array_equal(np.sort(perm), np.arange(perm.size)):
            raise InvalidSpecError("sort order must be a permutation")
        object.__setattr__(self, "permutation", perm)

    def __len__(self):
        return self.permutation.size

    @property
    def positions(self):
        """Rank position of every member (0 is best)."""
        pos = np.empty_like(self.permutation)
        pos[self.permutation] = np.arange(self.permutation.size)
        return pos


def _progress(t, T):
    if T <= 0:
        raise ConfigError("generation budget T must be positive")
    return min(max(t / T, 0.0), 1.0)


def penalty_coefficient(t, T, lam0=1.0, lam_max=1e4):
    """Geometric ramp from ``lam0`` at t = 0 to ``lam_max`` at t = T."""
    return lam0 * (lam_max / lam0) ** _progress(t, T)


def alpha_level(t, T, alpha0=1.0):
    """Violation tolerance shrinking linearly to 0 at t = T."""
    return alpha0 * (1.0 - _progress(t, T))


def violation_count(cons):
    cons = np.asarray(cons, dtype=float)
    return np.count_nonzero(cons[..., :3] > 0, axis=-1) + (cons[..., 3] > 0) + (cons[..., 4] > 0)


def _non_dominated_fronts(a, b):
    """Front index per point for minimising both ``a`` and ``b``."""
    n = a.size
    le = (a[:, None] <= a[None, :]) & (b[:, None] <= b[None, :])
    lt = (a[:, None] < a[None, :]) | (b[:, None] < b[None, :])
    dominates = le & lt  # [i, j]: i dominates j
    count = dominates.sum(axis=0)
    front = np.full(n, -1)
    level = 0
    current = np.flatnonzero(count == 0)
    while current.size:
        front[current] = level
        count = count - dominates[current].sum(axis=0)
        count[front >= 0] = -1
        current = np.flatnonzero(count == 0)
        level += 1
    return front


def sort_population(pop, strategy=PENALTY, t=None, T=None, params=None):
    """Best-first :class:`SortOrder` of an evaluated population."""
    pop.require_evaluated()
    t = pop.t if t is None else t
    T = pop.T if T is None else T
    params = dict(params or {})
    F = pop.F
    viol = violation_total(pop.cons)
    if strategy == PENALTY:
        lam = penalty_coefficient(t, T, params.get("lam0", 1.0), params.get("lam_max", 1e4))
        perm = np.lexsort((viol, F + lam * viol))
        params["lambda"] = lam
    elif strategy == NON_DOMINATED:
        infeasible = viol > 0
        front = np.zeros(F.size, dtype=int)
        if infeasible.any():
            idx = np.flatnonzero(infeasible)
            front[idx] = 1 + _non_dominated_fronts(F[idx], viol[idx])
        perm = np.lexsort((F, viol, front))
    elif strategy == ALPHA_LEVEL:
        alpha = alpha_level(t, T, params.get("alpha0", 1.0))
        eff = np.where(viol <= alpha, 0.0, viol)
        perm = np.lexsort((viol, F, eff, eff > 0))
        params["alpha"] = alpha
    elif strategy == VIOLATION_COUNT:
        perm = np.lexsort((viol, F, violation_count(pop.cons)))
    elif strategy == "Ordering":
        perm = rank_order(F, pop.cons)
    else:
        raise ConfigError(f"unknown sort strategy {strategy!r}")
    return SortOrder(perm, strategy, params)
