import json
import subprocess
import sys

import numpy as np
import pytest

from evoplanner.baselines import baseline_genome
from evoplanner.cli import EXIT_BUDGET, EXIT_CONFIG, EXIT_IO, EXIT_OK, main
from evoplanner.genome import describe, parse_description
from evoplanner.scenario import load_scenario

ZEROS = "0" * 64


def run_json(tmp_path, *argv):
    out = tmp_path / "run"
    assert main(["run", "--out", str(out), *argv]) == EXIT_OK
    return json.loads((out / "run.json").read_text()), out


def test_gen_scenario(tmp_path, capsys):
    path = tmp_path / "s.json"
    assert main(["gen-scenario", "--seed", "4", "--density", "dense", "--relief", "hills", "--out", str(path)]) == EXIT_OK
    sc = load_scenario(path)
    assert sc.invariant_violations() == []
    assert "violations=0" in capsys.readouterr().out
    again = tmp_path / "t.json"
    main(["gen-scenario", "--seed", "4", "--density", "dense", "--relief", "hills", "--out", str(again)])
    assert path.read_bytes() == again.read_bytes()


def test_run_zeros_genome(tmp_path, ref_scenario):
    doc, out = run_json(tmp_path, "--genome", ZEROS, "--max-generations", "3")
    pts = np.array(json.loads((out / "plot.json").read_text())["waypoints"])
    assert np.allclose(pts[0], ref_scenario.start) and np.allclose(pts[-1], ref_scenario.target)
    assert doc["planner"] == ZEROS and len(doc["codebook_sha256"]) == 64
    assert len((out / "telemetry.jsonl").read_text().splitlines()) == 4


def test_run_is_reproducible(tmp_path):
    a, _ = run_json(tmp_path / "a", "--baseline", "cipso", "--max-generations", "3", "--seed", "2")
    b, _ = run_json(tmp_path / "b", "--baseline", "cipso", "--max-generations", "3", "--seed", "2")
    assert a == b


def test_scenario_file_and_config(tmp_path):
    sc = tmp_path / "s.json"
    main(["gen-scenario", "--seed", "1", "--out", str(sc)])
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"run": {"max_generations": 2, "baseline": "jade"}}))
    doc, _ = run_json(tmp_path, "--scenario", str(sc), "--config", str(cfg))
    assert doc["generations"] == 2 and doc["planner"] == "jade"


def test_exit_codes(tmp_path):
    assert main(["run", "--baseline", "nope", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["run", "--genome", "01", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["run", "--genome", ZEROS, "--baseline", "ga", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["run", "--scenario", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == EXIT_IO
    assert main(["run", "--max-time", "1e-7", "--out", str(tmp_path)]) == EXIT_BUDGET
    assert main(["frobnicate"]) == EXIT_CONFIG
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["run", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["run", "--scenario", str(bad), "--out", str(tmp_path)]) == EXIT_IO


def test_describe_round_trip(capsys):
    g = baseline_genome("hsgwo")
    assert main(["describe", str(g)]) == EXIT_OK
    text = capsys.readouterr().out
    assert text.strip() == describe(g)
    assert parse_description(text) == g


def test_evolve_zero_epochs(tmp_path, capsys):
    out = tmp_path / "ep"
    argv = ["evolve", "--epochs", "0", "--pool-size", "3", "--seeds-per-genome", "1",
            "--planner-cap", "0.15", "--compare-seeds", "1", "--out", str(out)]
    assert main(argv) == EXIT_OK
    doc = json.loads((out / "result.json").read_text())
    assert doc["result"]["epochs"] == 0
    assert set(doc["comparison"]) == {"origin", "evolved"}
    assert (out / "genome.txt").read_text().strip() == doc["result"]["best_genome"]
    assert "evolved" in capsys.readouterr().out


def test_bench_small(tmp_path):
    sc = tmp_path / "case.json"
    main(["gen-scenario", "--seed", "2", "--out", str(sc)])
    out = tmp_path / "b"
    argv = ["bench", "--algorithms", f"ga,zero:{ZEROS}", "--scenario", str(sc), "--repeats", "2",
            "--max-time", "0.15", "--out", str(out)]
    assert main(argv) == EXIT_OK
    doc = json.loads((out / "bench.json").read_text())
    assert doc["algorithms"] == ["ga", "zero"] and doc["cases"] == ["case"]
    assert len(doc["records"]) == 4


def test_console_script_help():
    proc = subprocess.run([sys.executable, "-m", "evoplanner.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("gen-scenario", "run", "evolve", "bench", "describe"):
        assert cmd in proc.stdout
