"""Input checks shared by the estimator wrappers and the CLI."""

from __future__ import annotations

import numbers

import numpy as np

from .exceptions import ConfigError
from .genome import PlannerConfig, PlannerGenome, decode
from .scenario import Scenario, load_scenario


def check_scenario(obj):
    """Accept a Scenario or a path to a scenario file."""
    if isinstance(obj, Scenario):
        return obj
    if isinstance(obj, (str, bytes)) or hasattr(obj, "__fspath__"):
        return load_scenario(obj)
    raise ConfigError(f"expected a Scenario or a scenario path, got {type(obj).__name__}")


def check_scenarios(objs):
    """Non-empty list of scenarios from one scenario, a path or an iterable of either."""
    if isinstance(objs, Scenario) or isinstance(objs, (str, bytes)) or hasattr(objs, "__fspath__"):
        objs = [objs]
    out = [check_scenario(o) for o in objs]
    if not out:
        raise ConfigError("need at least one scenario")
    return out


def check_planner(planner, codebook=None):
    """Resolve a preset name, genome literal, integer or config to a PlannerConfig."""
    from .baselines import baseline_config, baseline_names

    if isinstance(planner, PlannerConfig):
        return planner
    if isinstance(planner, str) and planner.lower() in baseline_names():
        return baseline_config(planner, codebook)
    if isinstance(planner, (str, PlannerGenome)) or (
        isinstance(planner, numbers.Integral) and not isinstance(planner, bool)
    ):
        return decode(planner, codebook)
    raise ConfigError(f"cannot interpret {planner!r} as a planner")


def check_random_state(seed):
    """Integer seed; None maps to 0 so runs stay reproducible."""
    if seed is None:
        return 0
    if isinstance(seed, bool) or not isinstance(seed, (numbers.Integral, np.integer)):
        raise ConfigError("random_state must be an integer or None")
    if seed < 0:
        raise ConfigError("random_state must be non-negative")
    return int(seed)


def check_positive(value, name, allow_none=True):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not value > 0:
        raise ConfigError(f"{name} must be a positive number")
    return value
