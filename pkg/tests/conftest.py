import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from evoplanner.scenario import FIXED_ENDPOINTS, ScenarioParams, generate_scenario, reference_scenario

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def ref_scenario():
    return reference_scenario()


@pytest.fixture(scope="session")
def dense_scenario():
    return generate_scenario(7, ScenarioParams(density="dense", relief="hills", **FIXED_ENDPOINTS))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance report ----------------------------------------------------------

_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one ``CRITERION n: PASS|FAIL detail`` line; repeated at the end of the run."""

    def record(number, ok, detail):
        line = f"CRITERION {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
