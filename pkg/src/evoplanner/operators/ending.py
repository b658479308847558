"""Ending criteria, premature-convergence detection and restart policy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import ConfigError

BY_GENERATIONS = "generations"
BY_TIME = "time"

CASE1_NONE = "none"
STAGNATION = "stagnation"
HOMOGENIZATION = "homogenization"
GOAL = "goal"
CASE1 = (CASE1_NONE, STAGNATION, HOMOGENIZATION, GOAL)

CASE2_NONE = "none"
RESET = "reset"
KILL = "kill"
ADJUST = "adjust"
CASE2 = (CASE2_NONE, RESET, KILL, ADJUST)


@dataclass(frozen=True)
class EndingCriteria:
    """``limit`` is a generation count or a (virtual) time in seconds."""

    mode: str = BY_GENERATIONS
    limit: float = 100
    case1: str = CASE1_NONE
    case1_param: float = 0.0
    case2: str = CASE2_NONE
    case2_param: float = 0.0
    restart: bool = False

    def __post_init__(self):
        if self.mode not in (BY_GENERATIONS, BY_TIME):
            raise ConfigError(f"unknown ending mode {self.mode!r}")
        if self.case1 not in CASE1:
            raise ConfigError(f"unknown prematurity criterion {self.case1!r}")
        if self.case2 not in CASE2:
            raise ConfigError(f"unknown similarity action {self.case2!r}")
        if self.limit <= 0:
            raise ConfigError("ending limit must be positive")


@dataclass(frozen=True)
class Decision:
    stop: bool
    reason: str = ""

    @property
    def action(self):
        return "stop" if self.stop else "continue"


CONTINUE = Decision(False)


class EndingState:
    """Tracks how long the best report has stayed unchanged."""

    def __init__(self):
        self.best = None
        self.unchanged = 0

    def observe(self, pop):
        key = (float(pop.gbest_F), tuple(np.asarray(pop.gbest_cons, dtype=float)))
        if key == self.best:
            self.unchanged += 1
        else:
            self.best = key
            self.unchanged = 0
        return self.unchanged


def identical_fraction(X):
    """Share of members that duplicate the most common path exactly."""
    rows = np.ascontiguousarray(X.reshape(X.shape[0], -1))
    _, counts = np.unique(rows, axis=0, return_counts=True)
    return counts.max() / X.shape[0]


def premature(pop, criteria, state):
    if criteria.case1 == STAGNATION:
        return state.unchanged >= max(int(criteria.case1_param), 1)
    if criteria.case1 == HOMOGENIZATION:
        return identical_fraction(pop.X) * 100.0 >= criteria.case1_param
    if criteria.case1 == GOAL:
        feasible = np.all(pop.gbest_cons[:3] <= 0) and pop.gbest_cons[3] == 0 and pop.gbest_cons[4] == 0
        return bool(feasible and pop.gbest_F <= criteria.case1_param)
    return False


def ending_check(pop, criteria, state=None, elapsed=0.0):
    """Decide whether the run continues.

    ``state`` must have observed the population this generation for the
    stagnation test; ``elapsed`` is the run clock in seconds.
    """
    if criteria.mode == BY_GENERATIONS and pop.t >= criteria.limit:
        return Decision(True, "generations")
    if criteria.mode == BY_TIME and elapsed >= criteria.limit:
        return Decision(True, "time")
    if state is not None and premature(pop, criteria, state):
        return Decision(True, "premature")
    return CONTINUE


def similar(pop_a, pop_b, tol):
    """Two populations are similar when their best paths nearly coincide."""
    d = np.sqrt(np.mean((pop_a.gbest_X - pop_b.gbest_X) ** 2))
    return bool(d <= tol)
