"""Operator library: every slot a planner genome can select."""
from ..exceptions import ConfigError

from .auxiliary import (
    AuxiliaryToggles,
    antibody_scores,
    apply_auxiliary,
    cellular_pool,
    decay_factor,
    elite_indices,
    forbid_clones,
    inject,
    migrate,
    pfih,
    reinsert_elites,
    repair,
)
from .context import StepContext
from .ending import Decision, EndingCriteria, EndingState, ending_check
from .exploitation import (
    commensalism_step,
    crossover,
    crossover_step,
    de_step,
    pso_coefficients,
    pso_step,
    safari_step,
)
from .exploration import (
    cinf_step,
    collective_weights,
    mutate,
    mutation_step,
    pus_step,
    sgwo_step,
    update_cuu,
)
from .population import Individual, Population, better, not_worse, rank_order
from .selection import rank_scores, select
from .sorting import SortOrder, sort_population

EXPLOIT_OPERATORS = ("nPX", "UX", "AX", "CIPSO", "Safari", "Commensalism", "DE/rand", "DE/best")
EXPLORE_OPERATORS = ("UM", "NUM", "GM", "CM", "PUS", "SGWO", "CINF", "None")


def exploit_step(pop, ctx, name, params=None, twins=True):
    """Apply the exploitation operator ``name`` in place and return the population."""
    if name in ("nPX", "UX", "AX"):
        return crossover_step(pop, ctx, name, params, twins=twins)
    if name == "CIPSO":
        return pso_step(pop, ctx, params)
    if name == "Safari":
        return safari_step(pop, ctx, params)
    if name == "Commensalism":
        return commensalism_step(pop, ctx, params)
    if name == "DE/rand":
        return de_step(pop, ctx, "rand", params)
    if name == "DE/best":
        return de_step(pop, ctx, "best", params)
    raise ConfigError(f"unknown exploitation operator {name!r}")


def explore_step(pop, ctx, name, params=None):
    """Apply the exploration operator ``name``; ``None`` leaves the population as is."""
    if name in ("UM", "NUM", "GM", "CM"):
        return mutation_step(pop, ctx, name, params)
    if name == "PUS":
        return pus_step(pop, ctx, params)
    if name == "SGWO":
        return sgwo_step(pop, ctx, params)
    if name == "CINF":
        return cinf_step(pop, ctx, params)
    if name == "None":
        return pop
    raise ConfigError(f"unknown exploration operator {name!r}")


__all__ = [name for name in dir() if not name.startswith("_")]
