"""Run one decoded planner on a scenario.

Timing uses a deterministic virtual clock: every scored individual and every
generation advance it by calibrated costs, so time-based ending criteria and
runtime-aware fitness replay bit-for-bit. Host wall time is recorded next to
it for reference only.
"""

from __future__ import annotations

import json
import math
import threading
import time
from dataclasses import dataclass, field, replace

import numpy as np
from joblib import Parallel, delayed

from .evaluation import EvaluationConfig, EvaluationReport, Evaluator
from .exceptions import BudgetError, ConfigError
from .genome import PlannerConfig, PlannerGenome, decode, encode
from .operators import (
    Population,
    StepContext,
    elite_indices,
    ending_check,
    explore_step,
    exploit_step,
    rank_scores,
    reinsert_elites,
    select,
    sort_population,
    update_cuu,
)
from .operators.auxiliary import (
    AuxiliaryToggles,
    antibody_scores,
    apply_auxiliary,
    cellular_pool,
    decay_factor,
    inject,
    migrate,
)
from .operators.ending import (
    ADJUST,
    KILL,
    RESET,
    EndingCriteria,
    EndingState,
    similar,
)
from .operators.population import better, rank_order
from .operators.selection import member_scores
from .pathmodel import ControlPath, Waypoints, initialize_population

# seconds per scored individual (by smoother), per evaluation batch and per
# member-generation; least-squares fit to host timings of random planners
EVAL_COST = {"Bezier": 4.4e-5, "BSpline": 3.6e-5, "RTS": 4.2e-5, "TangentCircle": 1.07e-4}
CALL_COST = 1.18e-3
MEMBER_COST = 6.9e-5
SCHEDULE_STEPS = 1000
ISLAND_DEFAULT_INTERVAL = 10


@dataclass(frozen=True)
class RunBudget:
    """Outer limits applied on top of the genome's own ending criterion."""

    max_generations: int | None = None
    max_wall_time: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_generations is not None and self.max_generations < 0:
            raise ConfigError("max_generations must be non-negative")
        if self.max_wall_time is not None and self.max_wall_time < 0:
            raise ConfigError("max_wall_time must be non-negative")
        if not isinstance(self.rng_seed, (int, np.integer)) or self.rng_seed < 0:
            raise ConfigError("rng_seed must be a non-negative integer")


class VirtualClock:
    """Deterministic elapsed time from work counters."""

    def __init__(self, eval_cost, call_cost=CALL_COST, member_cost=MEMBER_COST):
        self.eval_cost = eval_cost
        self.call_cost = call_cost
        self.member_cost = member_cost
        self.evaluations = 0
        self.calls = 0
        self.member_generations = 0

    def charge_generation(self, members):
        self.member_generations += members

    @property
    def elapsed(self):
        return (
            self.evaluations * self.eval_cost
            + self.calls * self.call_cost
            + self.member_generations * self.member_cost
        )


@dataclass
class PlannerRun:
    """Outcome of one planner execution.

    ``elapsed`` is virtual seconds; ``wall_time`` the host measurement, left
    out of :meth:`to_dict` so artifacts replay exactly.
    """

    best_path: Waypoints
    best_control: ControlPath
    best_report: EvaluationReport
    elapsed: float
    generations_executed: int
    trace: list
    stop_reason: str
    evaluations: int
    telemetry: list = field(default_factory=list)
    simplified: list = field(default_factory=list)
    genome: str = ""
    seed: int = 0
    wall_time: float = 0.0

    @property
    def feasible(self):
        return self.best_report.feasible

    def to_dict(self):
        return {
            "genome": self.genome,
            "seed": self.seed,
            "report": self.best_report.to_dict(),
            "feasible": self.feasible,
            "elapsed": self.elapsed,
            "generations": self.generations_executed,
            "evaluations": self.evaluations,
            "stop_reason": self.stop_reason,
            "trace": [list(map(float, row)) for row in self.trace],
            "simplified": list(self.simplified),
            "control_points": self.best_control.points.tolist(),
            "waypoints": self.best_path.points.tolist(),
        }


def stream(seed, *key):
    """Independent generator for a (seed, key...) cell."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key)))


def _criteria(config, budget):
    limit = config.end_limit
    return EndingCriteria(
        mode="time" if config.end_mode == "time" else "generations",
        limit=limit,
        case1=config.case1,
        case1_param=config.case1_value,
        case2=config.case2,
        case2_param=config.case2_tolerance,
        restart=config.restart,
    )


def _toggles(config):
    migration = config.migration
    if config.division == "island" and not migration:
        migration = ISLAND_DEFAULT_INTERVAL
    return AuxiliaryToggles(
        elitism=config.elitism,
        repair=bool(config.repair),
        pfih=config.pfih,
        migration=migration if config.n_populations > 1 else 0,
        cellular=config.cellular,
        injection=config.injection,
        antibody=config.antibody > 0,
        forbid_clones=config.forbid_clones,
        decay=config.decay,
    )


class PlannerState:
    """Mutable state of a run, advanced by :func:`step_generation`."""

    def __init__(self, config, scenario, budget, codebook=None, evaluation=None, n_jobs=1):
        if isinstance(config, (PlannerGenome, str, int)):
            config = decode(config, codebook)
        self.config = config
        self.codebook = codebook
        self.n_jobs = int(n_jobs)
        self.scenario = scenario
        self.budget = budget
        self.genome = str(encode(config, codebook))
        eval_cfg = evaluation or EvaluationConfig()
        eval_cfg = EvaluationConfig(
            smoother=config.smoother,
            waypoint_factor=eval_cfg.waypoint_factor,
            weights=eval_cfg.weights,
            delta_d=eval_cfg.delta_d,
            rts_noise_ratio=eval_cfg.rts_noise_ratio,
            fillet_radius=eval_cfg.fillet_radius,
        )
        self.evaluator = Evaluator(scenario, config.n_control_points, eval_cfg)
        self.bounds = self.evaluator.bounds
        self.clock = VirtualClock(EVAL_COST[config.smoother])
        self.criteria = _criteria(config, budget)
        self.toggles = _toggles(config)
        self.params = {
            "sort": config.params("sort_param", codebook),
            "select": config.params("selection_param", codebook),
            "exploit": config.params("exploit_param", codebook),
            "explore": config.params("explore_param", codebook),
        }
        self.generation = 0
        self.stopped = False
        self.stop_reason = ""
        self.trace = []
        self.telemetry = []
        self.log = []
        self.finished = [False] * config.n_populations
        self.ending = [EndingState() for _ in range(config.n_populations)]
        self.restarts = 0
        self.wall_start = time.perf_counter()
        self._lock = threading.Lock()
        self._initialize()

    # -- helpers -----------------------------------------------------------

    def evaluate(self, X):
        with self._lock:
            out = self.evaluator(X)
            self.clock.evaluations = self.evaluator.n_evaluations
            self.clock.calls = self.evaluator.n_calls
        return out

    def _schedule(self):
        """(t, T) pair driving operator schedules."""
        if self.criteria.mode == "time":
            limit = self.criteria.limit
            if self.budget.max_wall_time is not None:
                limit = min(limit, self.budget.max_wall_time)
            frac = min(self.clock.elapsed / limit, 1.0) if limit > 0 else 1.0
            return int(math.floor(frac * SCHEDULE_STEPS)), SCHEDULE_STEPS
        T = int(self.criteria.limit)
        if self.budget.max_generations is not None:
            T = min(T, self.budget.max_generations)
        T = max(T, 1)
        return min(self.generation, T), T

    def _y_shift(self, p):
        if self.config.division != "MAPS" or self.config.n_populations == 1:
            return 0.0
        lo, hi = self.bounds.y_min, self.bounds.y_max
        return lo + (p + 0.5) * (hi - lo) / self.config.n_populations

    def make_members(self, p):
        def make(k, rng):
            return initialize_population(self.scenario, self.evaluator.frame, self.bounds, k, rng, self._y_shift(p))

        return make

    def _new_population(self, p, rng):
        X = self.make_members(p)(self.config.individuals_per_pop, rng)
        pop = Population(self.bounds.clamp(X))
        pop.t, pop.T = self._schedule()
        pop.evaluate(self.evaluate)
        pop.update_memory()
        return pop

    def _initialize(self):
        seed = self.budget.rng_seed
        self.pops = [self._new_population(p, stream(seed, p, 0, 0)) for p in range(self.config.n_populations)]
        self.clock.charge_generation(sum(p.size for p in self.pops))
        limit = self.budget.max_wall_time
        if limit is not None and self.clock.elapsed > limit:
            self._record()
            raise BudgetError("time budget exhausted by the initial evaluation", self.telemetry)
        self._share_best()
        self._record()

    def _share_best(self):
        if self.config.division == "CEGDA" and len(self.pops) > 1:
            b = self.best_population()
            src = self.pops[b]
            for pop in self.pops:
                pop.offer_gbest(src.gbest_X, src.gbest_F, src.gbest_cons, src.gbest_objs)

    def best_population(self):
        F = np.array([p.gbest_F for p in self.pops])
        cons = np.stack([p.gbest_cons for p in self.pops])
        return int(rank_order(F, cons)[0])

    def best(self):
        pop = self.pops[self.best_population()]
        return pop.gbest_X, pop.gbest_F, pop.gbest_cons, pop.gbest_objs

    def _record(self):
        _, F, cons, _ = self.best()
        viol = float(np.maximum(cons[:3], 0).sum() + cons[3] + cons[4])
        self.trace.append((float(F), viol))
        self.telemetry.append(
            {
                "generation": self.generation,
                "best_F": float(F),
                "violation": viol,
                "feasible": viol == 0.0,
                "elapsed": self.clock.elapsed,
                "evaluations": self.evaluator.n_evaluations,
                "members": [p.size for p in self.pops],
            }
        )

    # -- limits ------------------------------------------------------------

    def _budget_stop(self):
        b = self.budget
        if b.max_generations is not None and self.generation >= b.max_generations:
            return "generations"
        if b.max_wall_time is not None and self.clock.elapsed >= b.max_wall_time:
            return "time"
        return ""


def _select_pool(state, pop, order, rng):
    cfg = state.config
    N = cfg.individuals_per_pop
    if cfg.cellular:
        return cellular_pool(order, rng, N)
    sel_params = dict(state.params["select"])
    sel_params["scheme"] = cfg.rank_scheme
    scores = rank_scores(order, cfg.rank_scheme, sel_params.get("ratio", 0.8))
    if cfg.antibody > 0:
        damped = antibody_scores(member_scores(order, scores), pop.X, cfg.antibody)
        scores = damped[order.permutation]
    return select(pop, order, cfg.selection, sel_params, rng, N, scores=scores)


def _step_population(state, p, rng, schedule):
    cfg = state.config
    pop = state.pops[p]
    t, T = schedule
    pop.t, pop.T = t, T
    ctx = StepContext(
        rng=rng,
        bounds=state.bounds,
        evaluate=state.evaluate,
        scale=decay_factor(cfg.decay, state.generation),
        anchors=(state.evaluator.start_rot, state.evaluator.end_rot),
        log=state.log,
    )
    order = sort_population(pop, cfg.sort_strategy, t, T, state.params["sort"])
    elites = pop.take(elite_indices(pop, cfg.elitism, order))

    pool = pop.take(_select_pool(state, pop, order, rng))
    pool.t, pool.T = t, T

    prev_F, prev_cons = pool.F.copy(), pool.cons.copy()
    exploit_step(pool, ctx, cfg.exploit, state.params["exploit"], twins=cfg.twins)
    pool.evaluate(state.evaluate)
    update_cuu(pool, prev_F, prev_cons)

    before = pool.copy()
    explore_step(pool, ctx, cfg.explore, state.params["explore"])
    pool.evaluate(state.evaluate)
    if not cfg.keep_inferior:
        worse = better(before.F, before.cons, pool.F, pool.cons)
        for name in ("X", "V", "F", "cons", "objs"):
            getattr(pool, name)[worse] = getattr(before, name)[worse]
    return pool, elites, ctx


def step_generation(state):
    """Apply one generation to every active population; returns ``state``."""
    if state.stopped:
        raise ConfigError("run already stopped")
    cfg = state.config
    seed = state.budget.rng_seed
    g = state.generation + 1
    active = [p for p in range(len(state.pops)) if not state.finished[p]]
    schedule = state._schedule()
    jobs = [(state, p, stream(seed, p, g, 1), schedule) for p in active]
    if state.n_jobs > 1 and len(active) > 1:
        results = Parallel(n_jobs=state.n_jobs, backend="threading")(delayed(_step_population)(*job) for job in jobs)
    else:
        results = [_step_population(*job) for job in jobs]
    pools, elites, ctxs = {}, {}, {}
    for p, (pool, elite, ctx) in zip(active, results):
        pools[p], elites[p], ctxs[p] = pool, elite, ctx

    order = list(active)
    updated = apply_auxiliary(
        [pools[p] for p in order],
        _no_migration(state.toggles),
        [ctxs[p] for p in order],
        g,
        make=None,
        log=state.log,
    )
    for p, pop in zip(order, updated):
        if cfg.injection > 0:
            pop = inject(pop, cfg.injection, state.make_members(p), ctxs[p].rng)
            pop.X = state.bounds.clamp(pop.X)
            pop.evaluate(state.evaluate)
        reinsert_elites(pop, elites[p])
        pop.update_memory()
        state.pops[p] = pop
    if state.toggles.migration and len(active) > 1:
        migrate([state.pops[p] for p in active], g, state.toggles.migration, state.log)
        for p in active:
            state.pops[p].update_memory()
    state._share_best()
    state.clock.charge_generation(sum(state.pops[p].size for p in active))
    state.generation = g
    _ending(state, active)
    state._record()
    return state


def _no_migration(toggles):
    # migration and injection run separately: they cross populations or resize them
    return replace(toggles, migration=0, injection=0.0)


def _ending(state, active):
    crit = state.criteria
    seed = state.budget.rng_seed
    for p in active:
        pop = state.pops[p]
        pop.t, pop.T = state._schedule()
        pop.t = state.generation if crit.mode == "generations" else pop.t
        state.ending[p].observe(pop)
        decision = ending_check(pop, crit, state.ending[p], state.clock.elapsed)
        if decision.stop and decision.reason == "premature":
            if crit.restart:
                fresh = state._new_population(p, stream(seed, p, state.generation, 2))
                fresh.offer_gbest(pop.gbest_X, pop.gbest_F, pop.gbest_cons, pop.gbest_objs)
                state.pops[p] = fresh
                state.ending[p] = EndingState()
                state.restarts += 1
            else:
                state.finished[p] = True
        elif decision.stop:
            state.stopped = True
            state.stop_reason = decision.reason
    # populations drifting onto an already finished one
    if crit.case2 != "none" and len(state.pops) > 1:
        done = [q for q in range(len(state.pops)) if state.finished[q]]
        for p in active:
            if state.finished[p] or not any(similar(state.pops[p], state.pops[q], crit.case2_param) for q in done):
                continue
            rng = stream(seed, p, state.generation, 3)
            if crit.case2 == KILL:
                state.finished[p] = True
            elif crit.case2 == RESET:
                fresh = state._new_population(p, rng)
                fresh.offer_gbest(state.pops[p].gbest_X, state.pops[p].gbest_F, state.pops[p].gbest_cons, state.pops[p].gbest_objs)
                state.pops[p] = fresh
            elif crit.case2 == ADJUST:
                pop = state.pops[p]
                worst = pop.order()[pop.size // 2 :]
                X = pop.X.copy()
                X[worst] = state.bounds.clamp(state.make_members(p)(worst.size, rng))
                pop.set_positions(X)
                pop.evaluate(state.evaluate)
                pop.update_memory()
    if not state.stopped and all(state.finished):
        state.stopped = True
        state.stop_reason = "premature"
    if not state.stopped:
        reason = state._budget_stop()
        if reason:
            state.stopped = True
            state.stop_reason = reason


def finish(state):
    X, F, cons, objs = state.best()
    control = ControlPath(X, tuple(state.evaluator.start_rot), tuple(state.evaluator.end_rot))
    world = state.evaluator.waypoints(X[None])[0]
    report = EvaluationReport.from_arrays(objs, F, cons)
    return PlannerRun(
        best_path=Waypoints(world),
        best_control=control,
        best_report=report,
        elapsed=state.clock.elapsed,
        generations_executed=state.generation,
        trace=list(state.trace),
        stop_reason=state.stop_reason,
        evaluations=state.evaluator.n_evaluations,
        telemetry=list(state.telemetry),
        simplified=state.toggles.simplified() + _division_flags(state.config),
        genome=state.genome,
        seed=int(state.budget.rng_seed),
        wall_time=time.perf_counter() - state.wall_start,
    )


def _division_flags(config):
    return [config.division] if config.division in ("MAPS", "CEGDA") and config.n_populations > 1 else []


def run_planner(config, scenario, budget=None, codebook=None, evaluation=None, telemetry_path=None, n_jobs=1):
    """Execute a planner until its ending criterion or the budget stops it.

    ``n_jobs`` steps populations on parallel threads; results do not depend
    on it because every population draws from its own derived stream.
    """
    budget = budget or RunBudget()
    state = PlannerState(config, scenario, budget, codebook, evaluation, n_jobs)
    reason = state._budget_stop()
    if reason:
        state.stopped, state.stop_reason = True, reason
    while not state.stopped:
        step_generation(state)
    run = finish(state)
    if telemetry_path is not None:
        write_telemetry(run.telemetry, telemetry_path)
    return run


def write_telemetry(records, path):
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
