"""Evolutionary Programmer: a genetic algorithm over 64-bit planner genomes.

A genome is scored by running its decoded planner on every training scenario
for a few fixed planner seeds and combining solution quality with runtime.
Planner time is the engine's virtual clock, so evolution replays exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from .codebook import load_codebook
from .engine import RunBudget, run_planner, stream
from .exceptions import BudgetError, ConfigError
from .genome import (
    GENOME_BITS,
    PlannerGenome,
    _coerce,
    crossover_genome,
    decode,
    describe,
    mutate_genome,
    random_genome,
)

SCORE_LOW = 0.8
SCORE_HIGH = 1.2


@dataclass(frozen=True)
class EPConfig:
    """Meta-evolution settings.

    ``budget`` is the total planner time (virtual seconds) evolution may
    spend; ``epochs`` optionally caps the number of generations instead.
    ``planner_cap`` bounds any single planner run so oversized genomes cannot
    stall an epoch.
    """

    pool_size: int = 10
    W1: float = 0.9
    W2: float = 0.1
    E_t: float = 1.0
    lambda_ep: float = 10.0
    seeds_per_genome: int = 3
    budget: float | None = 60.0
    epochs: int | None = None
    planner_cap: float = 1.5
    p_bit: float = 2.0 / GENOME_BITS
    crossover_rate: float = 0.5
    late_fraction: float = 2.0 / 3.0
    seed: int = 0
    n_jobs: int = 1

    def __post_init__(self):
        if self.pool_size < 2:
            raise ConfigError("pool_size must be at least 2")
        if abs(self.W1 + self.W2 - 1.0) > 1e-12 or self.W1 < 0 or self.W2 < 0:
            raise ConfigError("W1 and W2 must be non-negative and sum to 1")
        if self.E_t <= 0:
            raise ConfigError("E_t must be positive")
        if self.budget is None and self.epochs is None:
            raise ConfigError("set a time budget or an epoch count")
        if self.seeds_per_genome < 1:
            raise ConfigError("seeds_per_genome must be at least 1")
        if not 0.0 <= self.p_bit <= 1.0:
            raise ConfigError("p_bit must lie in [0, 1]")


def fitness_ep(report, elapsed, cfg):
    """Quality/time fitness; larger is better.

    Infeasible reports carry ``lambda_ep`` times their violation total on top
    of F before weighting.
    """
    if elapsed < 0:
        raise ConfigError("elapsed time must be non-negative")
    F = report.F + cfg.lambda_ep * report.violation
    denom = cfg.W1 * F + cfg.W2 * elapsed / cfg.E_t
    if not denom > 0:
        raise ConfigError("fitness denominator must be positive")
    return 1.0 / denom


def rank_planners(fitnesses):
    """Linear scores from 0.8 (worst) to 1.2 (best); ties share a score."""
    f = np.asarray(fitnesses, dtype=float)
    if f.size == 1:
        return np.array([SCORE_HIGH])
    levels = np.unique(f)
    if levels.size == 1:
        return np.full(f.size, SCORE_HIGH)
    rank = np.searchsorted(levels, f)
    return SCORE_LOW + (SCORE_HIGH - SCORE_LOW) * rank / (levels.size - 1)


@dataclass(frozen=True)
class GenomeScore:
    genome: str
    fitness: float
    mean_F: float
    mean_violation: float
    mean_elapsed: float
    per_scenario: tuple


@dataclass
class EPResult:
    best_genome: PlannerGenome
    best_fitness: float
    lineage: list
    elapsed: float
    epochs: int
    log: list = field(default_factory=list)
    scores: dict = field(default_factory=dict)

    @property
    def best_history(self):
        """Best-ever F_EP after every epoch."""
        return [row["best_ever"] for row in self.lineage]

    def to_dict(self):
        return {
            "best_genome": str(self.best_genome),
            "best_fitness": self.best_fitness,
            "elapsed": self.elapsed,
            "epochs": self.epochs,
            "lineage": self.lineage,
            "log": self.log,
        }


def _planner_seed(cfg, j):
    return int(np.random.SeedSequence(cfg.seed, spawn_key=(7, j)).generate_state(1)[0])


def score_genome(genome, scenarios, cfg, codebook=None):
    """Mean F_EP over scenarios and the shared planner seeds."""
    config = decode(genome, codebook)
    per = []
    F_all, V_all, T_all = [], [], []
    for sc in scenarios:
        vals = []
        for j in range(cfg.seeds_per_genome):
            budget = RunBudget(max_wall_time=cfg.planner_cap, rng_seed=_planner_seed(cfg, j))
            try:
                run = run_planner(config, sc, budget, codebook)
                report, elapsed = run.best_report, run.elapsed
            except BudgetError:
                vals.append(0.0)
                T_all.append(cfg.planner_cap)
                continue
            vals.append(fitness_ep(report, elapsed, cfg))
            F_all.append(report.F)
            V_all.append(report.violation)
            T_all.append(elapsed)
        per.append(float(np.mean(vals)))
    return GenomeScore(
        genome=str(_coerce(genome)),
        fitness=float(np.mean(per)),
        mean_F=float(np.mean(F_all)) if F_all else math.inf,
        mean_violation=float(np.mean(V_all)) if V_all else math.inf,
        mean_elapsed=float(np.mean(T_all)),
        per_scenario=tuple(per),
    )


class _Scorer:
    """Caches genome scores; new genomes are scored in pool order."""

    def __init__(self, scenarios, cfg, codebook):
        self.scenarios = scenarios
        self.cfg = cfg
        self.codebook = codebook
        self.cache = {}
        self.spent = 0.0

    def __call__(self, genomes):
        todo = []
        for g in genomes:
            key = str(g)
            if key not in self.cache and key not in todo:
                todo.append(key)
        if todo:
            if self.cfg.n_jobs > 1:
                results = Parallel(n_jobs=self.cfg.n_jobs)(
                    delayed(score_genome)(g, self.scenarios, self.cfg, self.codebook) for g in todo
                )
            else:
                results = [score_genome(g, self.scenarios, self.cfg, self.codebook) for g in todo]
            for key, res in zip(todo, results):
                self.cache[key] = res
                self.spent += res.mean_elapsed * len(self.scenarios) * self.cfg.seeds_per_genome
        return [self.cache[str(g)] for g in genomes]


def _late(epoch, spent, cfg):
    if cfg.epochs is not None and epoch >= cfg.late_fraction * cfg.epochs:
        return True
    return cfg.budget is not None and spent >= cfg.late_fraction * cfg.budget


def _exhausted(epoch, spent, cfg):
    if cfg.epochs is not None and epoch >= cfg.epochs:
        return True
    return cfg.budget is not None and spent >= cfg.budget


def evolve(initial, scenarios, cfg=None, codebook=None):
    """Evolve planner genomes; returns the best genome ever scored.

    ``initial`` may hold the on-board genome; the pool is padded with random
    genomes. Each epoch scores the pool, ranks it 0.8 to 1.2, draws parents
    by roulette wheel, recombines and mutates them and carries the best
    genome over unchanged.
    """
    cfg = cfg or EPConfig()
    if not scenarios:
        raise ConfigError("need at least one scenario")
    codebook = codebook or load_codebook()
    rng = stream(cfg.seed, 0, 0)
    pool = [_coerce(g) for g in initial][: cfg.pool_size]
    while len(pool) < cfg.pool_size:
        pool.append(random_genome(rng))
    scorer = _Scorer(list(scenarios), cfg, codebook)
    log = []
    lineage = []
    best, best_fit = None, -math.inf
    epoch = 0
    while True:
        scores = scorer(pool)
        fits = np.array([s.fitness for s in scores])
        i = int(np.argmax(fits))
        if fits[i] > best_fit:
            best, best_fit = pool[i], float(fits[i])
        lineage.append(
            {
                "epoch": epoch,
                "genomes": [str(g) for g in pool],
                "fitness": fits.tolist(),
                "elapsed": [s.mean_elapsed for s in scores],
                "mean_F": [s.mean_F for s in scores],
                "per_scenario": [list(s.per_scenario) for s in scores],
                "best_ever": best_fit,
                "best_genome": str(best),
                "spent": scorer.spent,
            }
        )
        if _exhausted(epoch, scorer.spent, cfg):
            break
        epoch += 1
        rng = stream(cfg.seed, 1, epoch)
        # over-time genomes leave the pool late in the run
        keep = list(range(len(pool)))
        if _late(epoch, scorer.spent, cfg):
            keep = [k for k in keep if scores[k].mean_elapsed <= cfg.E_t]
            if len(keep) < len(pool):
                log.append(f"epoch {epoch}: removed {len(pool) - len(keep)} over-time genomes")
        parents = [pool[k] for k in keep]
        pfits = fits[keep]
        while len(parents) < 2:
            g = random_genome(rng)
            parents.append(g)
            pfits = np.append(pfits, scorer([g])[0].fitness)
            log.append(f"epoch {epoch}: pool refilled with a random genome")
        weights = rank_planners(pfits)
        elite = parents[int(np.argmax(pfits))]
        children = [elite]
        p = weights / weights.sum()
        while len(children) < cfg.pool_size:
            a, b = rng.choice(len(parents), size=2, p=p)
            if rng.random() < cfg.crossover_rate:
                ca, cb = crossover_genome(parents[a], parents[b], rng)
            else:
                ca, cb = parents[a], parents[b]
            for c in (ca, cb):
                if len(children) < cfg.pool_size:
                    children.append(mutate_genome(c, cfg.p_bit, rng))
        pool = children
    return EPResult(
        best_genome=best,
        best_fitness=best_fit,
        lineage=lineage,
        elapsed=scorer.spent,
        epochs=epoch,
        log=log,
        scores={k: asdict(v) for k, v in scorer.cache.items()},
    )


def write_artifact(result, out_dir, cfg, codebook=None, extra=None):
    """Results directory: genome literal, describe text, lineage table, config and codebook hash."""
    codebook = codebook or load_codebook()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "genome.txt").write_text(str(result.best_genome) + "\n")
    (out / "describe.txt").write_text(describe(result.best_genome, codebook) + "\n")
    with open(out / "lineage.csv", "w") as fh:
        fh.write("epoch,slot,genome,F_EP,elapsed\n")
        for row in result.lineage:
            for slot, (g, f, t) in enumerate(zip(row["genomes"], row["fitness"], row["elapsed"])):
                fh.write(f"{row['epoch']},{slot},{g},{f!r},{t!r}\n")
    config = asdict(cfg)
    # worker count does not change results, so artifacts from any n_jobs compare equal
    config.pop("n_jobs")
    doc = {
        "config": config,
        "codebook": {"version": codebook.version, "sha256": codebook.sha256},
        "result": result.to_dict(),
    }
    if extra:
        doc.update(extra)
    (out / "result.json").write_text(json.dumps(doc, indent=1, sort_keys=True))
    return out
