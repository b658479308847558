"""Fixed scenario suites used by the benchmark and the acceptance tests."""

from __future__ import annotations

from .scenario import FIXED_ENDPOINTS, ScenarioParams, generate_scenario

# four density cases on shared mountain relief; difficulty rises with density
DESK_CASES = {
    "sparse": (101, "sparse", "mountain"),
    "medium": (102, "medium", "mountain"),
    "more": (103, "more", "mountain"),
    "dense": (104, "dense", "mountain"),
}

# ten mixed density/relief scenarios for the improvement study
MIXED_CASES = [
    (201, "sparse", "basic"),
    (202, "medium", "mountain"),
    (203, "more", "canyon"),
    (204, "dense", "hills"),
    (205, "sparse", "mountain"),
    (206, "medium", "canyon"),
    (207, "more", "hills"),
    (208, "dense", "basic"),
    (209, "medium", "hills"),
    (210, "dense", "mountain"),
]


def make_case(seed, density, relief):
    return generate_scenario(seed, ScenarioParams(density=density, relief=relief, **FIXED_ENDPOINTS))


def desk_suite():
    return {name: make_case(*spec) for name, spec in DESK_CASES.items()}


def mixed_suite():
    return [make_case(*spec) for spec in MIXED_CASES]
