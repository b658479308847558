"""scikit-learn style wrappers.

Scenarios play the role of samples: ``fit`` consumes them, ``predict``
returns planned waypoints and ``score`` is the negated mean objective, so
larger is better as the sklearn convention expects. There is no feature
transform, so neither estimator provides ``transform``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_planner, check_positive, check_random_state, check_scenario, check_scenarios
from .baselines import ORIGIN, origin_genome
from .engine import RunBudget, run_planner
from .evolver import EPConfig, evolve
from .genome import encode


class PathPlanner(BaseEstimator):
    """One planner run per scenario.

    Parameters
    ----------
    planner : str, int, PlannerGenome or PlannerConfig
        Preset name or genome.
    max_generations, max_wall_time : optional budget overrides.
    random_state : int or None
    """

    def __init__(self, planner=ORIGIN, max_generations=None, max_wall_time=None, random_state=None):
        self.planner = planner
        self.max_generations = max_generations
        self.max_wall_time = max_wall_time
        self.random_state = random_state

    def _budget(self):
        return RunBudget(
            max_generations=self.max_generations,
            max_wall_time=check_positive(self.max_wall_time, "max_wall_time"),
            rng_seed=check_random_state(self.random_state),
        )

    def _run(self, scenario):
        return run_planner(self.config_, check_scenario(scenario), self._budget())

    def fit(self, X, y=None):
        """Plan on ``X`` (a scenario or path); keeps the run as ``run_``."""
        self.config_ = check_planner(self.planner)
        self.run_ = self._run(X)
        self.path_ = self.run_.best_path.points
        self.report_ = self.run_.best_report
        return self

    def predict(self, X=None):
        """Waypoints ``(m, 3)`` for ``X``; the fitted path when ``X`` is None."""
        check_is_fitted(self, "run_")
        if X is None:
            return self.path_
        return self._run(X).best_path.points

    def score(self, X, y=None):
        check_is_fitted(self, "config_")
        return -float(self._run(X).best_report.F)


class EvolutionaryProgrammer(BaseEstimator):
    """Evolve a planner genome on training scenarios, then plan with it.

    Parameters mirror :class:`~evoplanner.evolver.EPConfig`; ``origin`` is the
    on-board planner seeding the pool.
    """

    def __init__(
        self,
        origin=ORIGIN,
        pool_size=10,
        budget=60.0,
        epochs=None,
        seeds_per_genome=3,
        planner_cap=1.5,
        random_state=None,
        n_jobs=1,
    ):
        self.origin = origin
        self.pool_size = pool_size
        self.budget = budget
        self.epochs = epochs
        self.seeds_per_genome = seeds_per_genome
        self.planner_cap = planner_cap
        self.random_state = random_state
        self.n_jobs = n_jobs

    def _config(self):
        return EPConfig(
            pool_size=self.pool_size,
            budget=self.budget,
            epochs=self.epochs,
            seeds_per_genome=self.seeds_per_genome,
            planner_cap=check_positive(self.planner_cap, "planner_cap", allow_none=False),
            seed=check_random_state(self.random_state),
            n_jobs=self.n_jobs,
        )

    def fit(self, X, y=None):
        """Evolve on the scenarios ``X``; sets ``best_genome_`` and ``result_``."""
        scenarios = check_scenarios(X)
        self.ep_config_ = self._config()
        origin = origin_genome() if self.origin == ORIGIN else encode(check_planner(self.origin))
        self.origin_genome_ = origin
        self.result_ = evolve([origin], scenarios, self.ep_config_)
        self.best_genome_ = self.result_.best_genome
        return self

    def planner(self):
        check_is_fitted(self, "best_genome_")
        return PathPlanner(self.best_genome_, max_wall_time=self.ep_config_.planner_cap,
                           random_state=self.ep_config_.seed)

    def predict(self, X):
        """Waypoints planned by the evolved genome for each scenario in ``X``."""
        return [self.planner().fit(sc).path_ for sc in check_scenarios(X)]

    def score(self, X, y=None):
        """Mean negated F of the evolved planner over ``X``."""
        p = self.planner()
        return float(np.mean([-p.fit(sc).report_.F for sc in check_scenarios(X)]))
