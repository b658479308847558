"""Benchmark harness: success rate, average fitness and average time."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from joblib import Parallel, delayed

from .codebook import load_codebook
from .engine import RunBudget, run_planner
from .exceptions import ConfigError
from .genome import PlannerConfig, decode

SUCCESS_TOLERANCE = 0.1


def constraint_magnitudes(cons):
    """Positive part of g1..g3 and the raw h counts."""
    cons = np.asarray(cons, dtype=float)
    return np.concatenate([np.maximum(cons[..., :3], 0.0), cons[..., 3:]], axis=-1)


def run_successful(cons, tol=SUCCESS_TOLERANCE):
    """At most one violated constraint and none above ``tol`` (inclusive)."""
    mag = constraint_magnitudes(cons)
    return bool(np.count_nonzero(mag > 0) <= 1 and np.all(mag <= tol))


def case_seed(seed, case, rep):
    """Planner seed shared by every algorithm for one (case, repeat) cell."""
    return int(np.random.SeedSequence(int(seed), spawn_key=(11, case, rep)).generate_state(1)[0])


@dataclass
class BenchReport:
    """Per-run records plus SR/AF/AT summaries by algorithm and by case."""

    algorithms: list
    cases: list
    repeats: int
    seed: int
    records: list
    codebook_sha256: str = ""
    configs: dict = field(default_factory=dict)

    def _rows(self, alg, case=None):
        return [r for r in self.records if r["algorithm"] == alg and (case is None or r["case"] == case)]

    @staticmethod
    def summarize(rows):
        if not rows:
            raise ConfigError("no runs to summarize")
        return {
            "SR": 100.0 * sum(r["success"] for r in rows) / len(rows),
            "AF": float(np.mean([r["F"] for r in rows])),
            "AT": float(np.mean([r["elapsed"] for r in rows])),
            "violation": float(np.mean([r["violation"] for r in rows])),
            "runs": len(rows),
        }

    def summary(self):
        return {alg: self.summarize(self._rows(alg)) for alg in self.algorithms}

    def by_case(self):
        return {
            case: {alg: self.summarize(self._rows(alg, case)) for alg in self.algorithms} for case in self.cases
        }

    def table(self):
        """Aligned text table: overall rows followed by per-case rows."""
        lines = [f"{'algorithm':<12}{'case':<14}{'SR%':>8}{'AF':>10}{'AT(s)':>10}"]
        for case, rows in [("ALL", self.summary())] + list(self.by_case().items()):
            for alg, s in rows.items():
                lines.append(f"{alg:<12}{case:<14}{s['SR']:>8.1f}{s['AF']:>10.4f}{s['AT']:>10.4f}")
        return "\n".join(lines)

    def to_dict(self):
        return {
            "algorithms": self.algorithms,
            "cases": self.cases,
            "repeats": self.repeats,
            "seed": self.seed,
            "codebook_sha256": self.codebook_sha256,
            "configs": self.configs,
            "summary": self.summary(),
            "by_case": self.by_case(),
            "records": self.records,
        }

    def write(self, out_dir):
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "bench.json").write_text(json.dumps(self.to_dict(), indent=1, sort_keys=True))
        with open(out / "bench.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["algorithm", "case", "SR", "AF", "AT"])
            for case, rows in [("ALL", self.summary())] + list(self.by_case().items()):
                for alg, s in rows.items():
                    w.writerow([alg, case, f"{s['SR']:.4f}", repr(s["AF"]), repr(s["AT"])])
        with open(out / "runs.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["algorithm", "case", "repeat", "seed", "F", "g1", "g2", "g3", "h1", "h2", "success", "elapsed"])
            for r in self.records:
                w.writerow([r["algorithm"], r["case"], r["repeat"], r["seed"], repr(r["F"]), *map(repr, r["constraints"]), int(r["success"]), repr(r["elapsed"])])
        return out


def records_sr(records, algorithm, case=None):
    """Success rate recomputed from raw constraint vectors."""
    rows = [r for r in records if r["algorithm"] == algorithm and (case is None or r["case"] == case)]
    return 100.0 * sum(run_successful(r["constraints"]) for r in rows) / len(rows)


def _resolve(spec, case, codebook):
    if isinstance(spec, dict):
        spec = spec[case]
    if isinstance(spec, PlannerConfig):
        return spec
    return decode(spec, codebook)


def _one(alg, case, rep, seed, config, scenario, budget_kw, codebook):
    budget = RunBudget(rng_seed=seed, **budget_kw)
    run = run_planner(config, scenario, budget, codebook)
    cons = list(run.best_report.constraints)
    return {
        "algorithm": alg,
        "case": case,
        "repeat": rep,
        "seed": seed,
        "F": run.best_report.F,
        "constraints": [float(c) for c in cons],
        "violation": run.best_report.violation,
        "success": run_successful(cons),
        "elapsed": run.elapsed,
        "generations": run.generations_executed,
    }


def bench(algorithms, scenarios, repeats, seed=0, max_wall_time=None, n_jobs=1, codebook=None):
    """Run every algorithm ``repeats`` times on every named scenario.

    ``algorithms`` maps names to a config, genome, or a per-case mapping of
    those; ``scenarios`` maps case names to scenarios.
    """
    if repeats < 1:
        raise ConfigError("repeats must be at least 1")
    codebook = codebook or load_codebook()
    cases = list(scenarios)
    budget_kw = {} if max_wall_time is None else {"max_wall_time": max_wall_time}
    jobs = []
    configs = {}
    for alg, spec in algorithms.items():
        for ci, case in enumerate(cases):
            config = _resolve(spec, case, codebook)
            configs.setdefault(alg, {})[case] = list(config)
            for rep in range(repeats):
                jobs.append((alg, case, rep, case_seed(seed, ci, rep), config, scenarios[case], budget_kw, codebook))
    if n_jobs > 1:
        records = Parallel(n_jobs=n_jobs)(delayed(_one)(*job) for job in jobs)
    else:
        records = [_one(*job) for job in jobs]
    return BenchReport(list(algorithms), cases, repeats, int(seed), list(records), codebook.sha256, configs)
