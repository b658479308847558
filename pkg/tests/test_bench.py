import csv
import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from evoplanner.baselines import baseline_config, baseline_genome
from evoplanner.bench import bench, case_seed, constraint_magnitudes, records_sr, run_successful
from evoplanner.exceptions import ConfigError
from evoplanner.genome import PlannerGenome


def test_success_rule_examples():
    assert run_successful([0.0, 0.0, 0.0, 0, 0])
    assert run_successful([0.1, 0.0, 0.0, 0, 0])  # exactly at the tolerance
    assert not run_successful([0.1 + 1e-9, 0.0, 0.0, 0, 0])
    assert not run_successful([0.05, 0.05, 0.0, 0, 0])  # two small violations
    assert not run_successful([0.0, 0.0, 0.0, 1, 0])  # any h violation counts as 1
    assert run_successful([-3.0, -1.0, -0.5, 0, 0])


def test_magnitudes_clip_only_inequalities():
    assert np.array_equal(constraint_magnitudes([-1.0, 0.5, -2.0, 2, 0]), [0.0, 0.5, 0.0, 2.0, 0.0])


@given(st.lists(st.floats(-1.0, 1.0), min_size=3, max_size=3), st.integers(0, 2), st.integers(0, 2))
def test_success_matches_definition(g, h1, h2):
    mags = [max(v, 0.0) for v in g] + [h1, h2]
    expected = sum(m > 0 for m in mags) <= 1 and max(mags) <= 0.1
    assert run_successful(g + [h1, h2]) == expected


def test_case_seeds_are_shared_and_distinct():
    assert case_seed(0, 1, 2) == case_seed(0, 1, 2)
    seeds = {case_seed(0, c, r) for c in range(4) for r in range(25)}
    assert len(seeds) == 100


def test_zero_repeats(ref_scenario):
    with pytest.raises(ConfigError):
        bench({"ga": baseline_config("ga")}, {"ref": ref_scenario}, 0)


@pytest.fixture(scope="module")
def small_report(ref_scenario, dense_scenario):
    algs = {"ga": baseline_genome("ga"), "zero": {"ref": PlannerGenome(0), "dense": baseline_config("cipso")}}
    return bench(algs, {"ref": ref_scenario, "dense": dense_scenario}, 2, seed=3, max_wall_time=0.2)


def test_report_shape(small_report):
    assert len(small_report.records) == 2 * 2 * 2
    s = small_report.summary()
    assert set(s) == {"ga", "zero"} and s["ga"]["runs"] == 4
    assert set(small_report.by_case()) == {"ref", "dense"}
    # per-case specs resolve independently
    assert small_report.configs["zero"]["dense"] == list(baseline_config("cipso"))
    assert "algorithm" in small_report.table()


def test_algorithms_share_seeds(small_report):
    seeds = {}
    for r in small_report.records:
        seeds.setdefault((r["case"], r["repeat"]), set()).add(r["seed"])
    assert all(len(v) == 1 for v in seeds.values())


def test_sr_recomputed_from_files(tmp_path, small_report):
    out = small_report.write(tmp_path)
    with open(out / "runs.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    for alg in ("ga", "zero"):
        mine = [r for r in rows if r["algorithm"] == alg]
        ok = [run_successful([float(r[k]) for k in ("g1", "g2", "g3", "h1", "h2")]) for r in mine]
        assert 100.0 * sum(ok) / len(ok) == pytest.approx(small_report.summary()[alg]["SR"])
        assert records_sr(small_report.records, alg) == small_report.summary()[alg]["SR"]
    doc = json.loads((out / "bench.json").read_text())
    assert doc["repeats"] == 2 and doc["codebook_sha256"] == small_report.codebook_sha256


def test_bench_is_reproducible(ref_scenario):
    a = bench({"ga": baseline_genome("ga")}, {"ref": ref_scenario}, 2, seed=9, max_wall_time=0.15)
    b = bench({"ga": baseline_genome("ga")}, {"ref": ref_scenario}, 2, seed=9, max_wall_time=0.15, n_jobs=2)
    assert a.records == b.records
