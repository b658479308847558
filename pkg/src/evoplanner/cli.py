"""Command-line interface: gen-scenario, run, evolve, bench and describe."""

from __future__ import annotations

import argparse
import json
import sys

from pathlib import Path

import numpy as np

from . import baselines
from .bench import bench
from .codebook import load_codebook
from .engine import RunBudget, run_planner, write_telemetry
from .evolver import EPConfig, evolve, write_artifact
from .exceptions import (
    BudgetError,
    ConfigError,
    EncodingError,
    InvalidSpecError,
    PlacementError,
    ScenarioSchemaError,
)
from .genome import PlannerGenome, decode, describe
from .scenario import (
    DENSITY_PRESETS,
    FIXED_ENDPOINTS,
    RELIEF_PRESETS,
    ScenarioParams,
    generate_scenario,
    load_scenario,
    reference_scenario,
    save_scenario,
    scenario_to_dict,
)
from .suites import desk_suite

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_PLACEMENT = 4
EXIT_BUDGET = 5


def _write_json(path, doc):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    return path


def _scenario(path):
    return reference_scenario() if path in (None, "reference") else load_scenario(path)


def _planner(args, codebook):
    if args.genome and args.baseline:
        raise ConfigError("pass either --genome or --baseline, not both")
    if args.genome:
        return PlannerGenome.from_string(args.genome), args.genome
    name = args.baseline or baselines.ORIGIN
    return baselines.baseline_genome(name, codebook), name


def plot_data(scenario, run, stride=4):
    """Waypoints, threat outlines and a decimated terrain grid for external plotting."""
    doc = scenario_to_dict(scenario)
    terrain = doc["terrain"]
    grid = scenario.terrain.grid[::stride, ::stride]
    return {
        "waypoints": run.best_path.points.tolist(),
        "start": list(scenario.start),
        "target": list(scenario.target),
        "threats": doc["threats"],
        "terrain": {
            "origin": terrain["origin"],
            "cell_size": terrain["cell_size"] * stride,
            "grid": grid.tolist(),
        },
    }


# -- commands --------------------------------------------------------------


def cmd_gen_scenario(args):
    params = ScenarioParams(density=args.density, relief=args.relief)
    if args.fixed_endpoints:
        params = ScenarioParams(density=args.density, relief=args.relief, **FIXED_ENDPOINTS)
    sc = generate_scenario(args.seed, params)
    out = save_scenario(sc, args.out or "scenario.json")
    print(
        f"wrote {out}: radars={len(sc.radars)} missiles={len(sc.missiles)} nfzs={len(sc.nfzs)} "
        f"start={tuple(round(v, 3) for v in sc.start)} target={tuple(round(v, 3) for v in sc.target)} "
        f"violations={len(sc.invariant_violations())}"
    )
    return EXIT_OK


def cmd_run(args):
    codebook = load_codebook()
    genome, label = _planner(args, codebook)
    sc = _scenario(args.scenario)
    budget = RunBudget(max_generations=args.max_generations, max_wall_time=args.max_time, rng_seed=args.seed)
    run = run_planner(decode(genome, codebook), sc, budget, codebook)
    out = Path(args.out or "run")
    out.mkdir(parents=True, exist_ok=True)
    doc = run.to_dict()
    doc["planner"] = label
    doc["codebook_sha256"] = codebook.sha256
    _write_json(out / "run.json", doc)
    write_telemetry(run.telemetry, out / "telemetry.jsonl")
    _write_json(out / "plot.json", plot_data(sc, run))
    r = run.best_report
    print(f"planner={label} F={r.F:.6f} violation={r.violation:.6f} feasible={r.feasible} "
          f"generations={run.generations_executed} elapsed={run.elapsed:.4f}s stop={run.stop_reason}")
    return EXIT_OK


def _compare(genomes, scenarios, seeds, codebook, cap):
    rows = {}
    for label, g in genomes.items():
        vals = []
        for sc in scenarios:
            for s in range(seeds):
                run = run_planner(decode(g, codebook), sc, RunBudget(max_wall_time=cap, rng_seed=10_000 + s), codebook)
                vals.append((run.best_report.F, run.best_report.violation, run.elapsed))
        rows[label] = np.mean(vals, axis=0).tolist()
    return rows


def cmd_evolve(args):
    codebook = load_codebook()
    scenarios = [load_scenario(p) for p in args.scenario] if args.scenario else [reference_scenario()]
    origin = PlannerGenome.from_string(args.origin) if args.origin else baselines.origin_genome(codebook)
    cfg = EPConfig(
        pool_size=args.pool_size,
        budget=args.budget,
        epochs=args.epochs,
        seeds_per_genome=args.seeds_per_genome,
        planner_cap=args.planner_cap,
        seed=args.seed,
        n_jobs=args.n_jobs,
    )
    result = evolve([origin], scenarios, cfg, codebook)
    comparison = _compare(
        {"origin": origin, "evolved": result.best_genome}, scenarios, args.compare_seeds, codebook, cfg.planner_cap
    )
    out = write_artifact(result, args.out or "evolve", cfg, codebook, {"comparison": comparison})
    print(describe(result.best_genome, codebook))
    print(f"best F_EP={result.best_fitness:.6f} epochs={result.epochs} spent={result.elapsed:.2f}s")
    for label, (F, viol, t) in comparison.items():
        print(f"{label:<8} mean F={F:.6f} violation={viol:.6f} time={t:.4f}s")
    print(f"artifact: {out}")
    return EXIT_OK


def cmd_bench(args):
    codebook = load_codebook()
    names = [a.strip() for a in args.algorithms.split(",") if a.strip()]
    algorithms = {}
    for name in names:
        if ":" in name:
            label, literal = name.split(":", 1)
            algorithms[label] = PlannerGenome.from_string(literal)
        else:
            algorithms[name] = baselines.baseline_config(name, codebook)
    if args.scenario:
        scenarios = {Path(p).stem: load_scenario(p) for p in args.scenario}
    else:
        scenarios = desk_suite()
    report = bench(algorithms, scenarios, args.repeats, args.seed, args.max_time, args.n_jobs, codebook)
    out = report.write(args.out or "bench")
    print(report.table())
    print(f"artifact: {out}")
    return EXIT_OK


def cmd_describe(args):
    print(describe(args.genome))
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master random seed")
    common.add_argument("--config", help="JSON file of option defaults for the command")
    common.add_argument("--out", help="output file or directory")

    parser = argparse.ArgumentParser(prog="evoplanner", description=__doc__, parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenario", parents=[common], help="generate a scenario file")
    p.add_argument("--density", default="sparse", choices=sorted(DENSITY_PRESETS))
    p.add_argument("--relief", default="basic", choices=sorted(RELIEF_PRESETS))
    p.add_argument("--fixed-endpoints", action="store_true", help="use the fixed (0,0) to (100,70) mission")
    p.set_defaults(func=cmd_gen_scenario)

    p = sub.add_parser("run", parents=[common], help="run one planner on a scenario")
    p.add_argument("--genome", help="64-character 0/1 genome literal")
    p.add_argument("--baseline", help=f"named preset: {', '.join(baselines.baseline_names())}")
    p.add_argument("--scenario", help="scenario file (default: shipped reference)")
    p.add_argument("--max-generations", type=int)
    p.add_argument("--max-time", type=float, help="virtual seconds")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("evolve", parents=[common], help="evolve a planner genome")
    p.add_argument("--scenario", action="append", help="training scenario file (repeatable)")
    p.add_argument("--origin", help="on-board genome literal (default: ga preset)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--budget", type=float, default=60.0, help="planner seconds to spend; 1200 for full scale")
    p.add_argument("--pool-size", type=int, default=10)
    p.add_argument("--seeds-per-genome", type=int, default=3)
    p.add_argument("--planner-cap", type=float, default=1.5)
    p.add_argument("--compare-seeds", type=int, default=5)
    p.add_argument("--n-jobs", type=int, default=1)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("bench", parents=[common], help="compare planners on a scenario set")
    p.add_argument("--algorithms", default=",".join(baselines.baseline_names()), help="comma list; label:GENOME adds a genome")
    p.add_argument("--scenario", action="append", help="scenario file (repeatable; default: desk suite)")
    p.add_argument("--repeats", type=int, default=25)
    p.add_argument("--max-time", type=float)
    p.add_argument("--n-jobs", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("describe", parents=[common], help="print a genome token by token")
    p.add_argument("genome")
    p.set_defaults(func=cmd_describe)
    return parser


def _apply_config(parser, argv, args):
    """Re-parse with defaults taken from the ``--config`` JSON file."""
    try:
        doc = json.loads(Path(args.config).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config file must hold a JSON object")
    section = doc.get(args.command, doc)
    defaults = {k.replace("-", "_"): v for k, v in section.items() if not isinstance(v, dict)}
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None):
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.config:
            args = _apply_config(parser, argv, args)
        return args.func(args)
    except PlacementError as exc:
        print(f"placement error: {exc}", file=sys.stderr)
        return EXIT_PLACEMENT
    except BudgetError as exc:
        print(f"budget error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ScenarioSchemaError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ConfigError, InvalidSpecError, EncodingError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
