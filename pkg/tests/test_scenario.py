import hashlib
import json
from importlib import resources

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from evoplanner.exceptions import InvalidSpecError, OutOfDomainError, PlacementError, ScenarioSchemaError
from evoplanner.scenario import (
    DENSITY_PRESETS,
    FIXED_ENDPOINTS,
    RELIEF_PRESETS,
    Scenario,
    ScenarioParams,
    Terrain,
    Threat,
    generate_scenario,
    generate_terrain,
    load_scenario,
    make_reference_scenario,
    reference_scenario,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    scenarios_equal,
)

REFERENCE_SHA256 = "53b364d2a2973317664eb13bd3dcc9041be5b5c8ea461182a7595ea838d9bf5e"


def test_reference_fixture_checksum():
    data = (resources.files("evoplanner") / "data" / "reference_scenario.json").read_bytes()
    assert hashlib.sha256(data).hexdigest() == REFERENCE_SHA256


def test_reference_fixture_regenerates(ref_scenario):
    assert scenarios_equal(ref_scenario, make_reference_scenario())
    assert ref_scenario.start[:2] == (0.0, 0.0)
    assert ref_scenario.target[:2] == (100.0, 70.0)


def test_generation_is_deterministic():
    a = generate_scenario(5, ScenarioParams(density="more", relief="mountain"))
    b = generate_scenario(5, ScenarioParams(density="more", relief="mountain"))
    c = generate_scenario(6, ScenarioParams(density="more", relief="mountain"))
    assert scenarios_equal(a, b)
    assert not scenarios_equal(a, c)


def test_density_presets_monotone():
    order = ["sparse", "medium", "more", "dense"]
    totals = [sum(DENSITY_PRESETS[d]) for d in order]
    assert totals == sorted(totals)
    for d in order:
        sc = generate_scenario(1, ScenarioParams(density=d, **FIXED_ENDPOINTS))
        assert len(sc.threats) == sum(DENSITY_PRESETS[d])
        assert sc.invariant_violations() == []


def test_relief_presets_differ():
    peaks = {}
    for r in ["basic", "mountain", "canyon", "hills"]:
        sc = generate_scenario(3, ScenarioParams(relief=r, **FIXED_ENDPOINTS))
        peaks[r] = float(np.ptp(sc.terrain.grid))
    assert peaks["mountain"] > peaks["basic"]
    assert len(set(peaks.values())) == 4


def test_flat_relief_is_flat():
    sc = generate_scenario(3, ScenarioParams(relief="flat"))
    assert np.ptp(sc.terrain.grid) == 0.0


def test_unknown_presets():
    with pytest.raises(InvalidSpecError):
        generate_scenario(0, ScenarioParams(density="crowded"))
    with pytest.raises(InvalidSpecError):
        generate_scenario(0, ScenarioParams(relief="alps"))


def test_placement_failure():
    with pytest.raises(PlacementError):
        generate_scenario(0, ScenarioParams(mission_space=((0, 20), (0, 20)), min_separation=500.0, max_retries=5))


def test_start_and_target_clearance(ref_scenario):
    sc = ref_scenario
    for p in (sc.start, sc.target):
        assert p[2] == pytest.approx(float(sc.terrain.heights(p[0], p[1])) + sc.safe_height)


def test_save_load_roundtrip(tmp_path, ref_scenario):
    path = save_scenario(ref_scenario, tmp_path / "s.json")
    assert scenarios_equal(load_scenario(path), ref_scenario)


def test_schema_errors(tmp_path, ref_scenario):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ScenarioSchemaError):
        load_scenario(bad)
    doc = scenario_to_dict(ref_scenario)
    doc["terrain"]["heights"] = doc["terrain"]["heights"][:-1]
    with pytest.raises(ScenarioSchemaError):
        scenario_from_dict(doc)
    doc = scenario_to_dict(ref_scenario)
    del doc["start"]
    with pytest.raises(ScenarioSchemaError):
        scenario_from_dict(doc)


def test_terrain_nodes_and_domain():
    grid = np.arange(12.0).reshape(3, 4)
    t = Terrain(grid, cell_size=2.0, origin=(10.0, 20.0))
    assert t.heights(10.0, 20.0) == 0.0
    assert t.heights(16.0, 24.0) == 11.0
    assert t.heights(11.0, 21.0) == pytest.approx((0 + 1 + 4 + 5) / 4)
    with pytest.raises(OutOfDomainError):
        t.heights(9.0, 20.0)
    assert t.heights(0.0, 0.0, clip=True) == 0.0


def test_terrain_validation():
    with pytest.raises(InvalidSpecError):
        Terrain(np.zeros((1, 5)))
    with pytest.raises(InvalidSpecError):
        Terrain(np.array([[0.0, np.nan], [0.0, 0.0]]))


def test_threat_validation():
    with pytest.raises(InvalidSpecError):
        Threat("laser", (0, 0), 1.0)
    with pytest.raises(InvalidSpecError):
        Threat("radar", (0, 0), 0.0)
    with pytest.raises(InvalidSpecError):
        Threat("nfz", rect=(1, 0, 0, 1))
    z = Threat("nfz", rect=(0, 4, 0, 2))
    assert z.center == (2.0, 1.0)
    assert bool(z.contains_xy(4.0, 2.0)) and not bool(z.contains_xy(4.1, 2.0))


def test_generate_terrain_octaves_deterministic():
    a = generate_terrain(1, (0, 30, 0, 20), RELIEF_PRESETS["hills"])
    b = generate_terrain(1, (0, 30, 0, 20), RELIEF_PRESETS["hills"])
    assert a == b


@given(st.floats(0, 1), st.floats(0, 1))
def test_interpolation_within_cell_range(u, v):
    grid = np.array([[1.0, 5.0], [-2.0, 3.0]])
    t = Terrain(grid)
    h = float(t.heights(u, v))
    assert grid.min() - 1e-12 <= h <= grid.max() + 1e-12


@given(st.integers(0, 10_000))
def test_random_scenarios_valid(seed):
    sc = generate_scenario(seed, ScenarioParams(density="dense"))
    assert sc.invariant_violations() == []
