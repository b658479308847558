"""Evolve 64-bit genomes that encode UAV 3-D path planners."""

from .baselines import baseline_config, baseline_genome, baseline_names, origin_genome
from .bench import bench
from .codebook import load_codebook
from .engine import PlannerRun, RunBudget, run_planner
from .estimators import EvolutionaryProgrammer, PathPlanner
from .evaluation import EvaluationReport, Evaluator, evaluate
from .evolver import EPConfig, EPResult, evolve, fitness_ep
from .exceptions import (
    BudgetError,
    ConfigError,
    EncodingError,
    EvoPlannerError,
    InvalidSpecError,
    NotEvaluatedError,
    OutOfDomainError,
    PlacementError,
    ScenarioSchemaError,
)
from .genome import PlannerConfig, PlannerGenome, decode, describe, encode, random_genome
from .scenario import Scenario, ScenarioParams, generate_scenario, load_scenario, reference_scenario, save_scenario

__version__ = "0.1.0"
