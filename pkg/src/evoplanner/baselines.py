"""Named planner presets built from the operator library.

They approximate the published algorithms inside this framework's shared
representation (same control points, smoother and generation budget) so
comparisons measure operator choices rather than plumbing.
"""

from __future__ import annotations

from .exceptions import ConfigError
from .genome import PlannerConfig, PlannerGenome, decode, encode

_COMMON = dict(
    n_control_points=8,
    n_populations=1,
    individuals_per_pop=32,
    division="single",
    smoother="BSpline",
    sort_strategy="Penalty",
    sort_param=2,
    end_mode="generations",
    end_param=4,  # 100 generations
)

# SUS over uniform scores returns every member exactly once, which keeps a
# swarm's identity intact for the algorithms that have no selection step.
_KEEP_ALL = dict(selection="StochasticUniversalSampling", rank_scheme="Uniform", selection_param=0)

PRESETS = {
    # the incumbent genetic algorithm: tournament, one-point crossover, Gaussian mutation
    "ga": PlannerConfig(
        **_COMMON,
        elitism=0.05,
        selection="Tournament",
        selection_param=0,
        exploit="nPX",
        exploit_param=0,
        twins=True,
        explore="GM",
        explore_param=1,
        keep_inferior=True,
    ),
    "cipso": PlannerConfig(**_COMMON, **_KEEP_ALL, exploit="CIPSO", exploit_param=2, explore="None"),
    "jade": PlannerConfig(**_COMMON, **_KEEP_ALL, exploit="DE/best", exploit_param=1, explore="None"),
    "cipde": PlannerConfig(
        **_COMMON, **_KEEP_ALL, exploit="DE/rand", exploit_param=1, explore="CINF", explore_param=1
    ),
    "mwps": PlannerConfig(
        **_COMMON, **_KEEP_ALL, exploit="Safari", exploit_param=2, explore="UM", explore_param=1
    ),
    "hsgwo": PlannerConfig(**_COMMON, **_KEEP_ALL, exploit="Commensalism", explore="SGWO"),
}

# hyper-heuristic planner: a genome evolved from the ga preset over four training
# scenarios (seeds 301-304, one per density) with a 240 s budget and seed 31
HHPSO_GENOME = "0010101101010111011110011000100000011101000110100100101100100110"

ORIGIN = "ga"


def baseline_names():
    return tuple(PRESETS) + ("hhpso",)


def baseline_config(name, codebook=None):
    key = name.lower()
    if key == "hhpso":
        return decode(HHPSO_GENOME, codebook)
    if key not in PRESETS:
        raise ConfigError(f"unknown baseline {name!r}; choose from {', '.join(baseline_names())}")
    return PRESETS[key]


def baseline_genome(name, codebook=None) -> PlannerGenome:
    return encode(baseline_config(name, codebook), codebook)


def origin_genome(codebook=None) -> PlannerGenome:
    return baseline_genome(ORIGIN, codebook)
