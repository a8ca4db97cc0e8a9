import random
import sys

import pytest
from hypothesis import HealthCheck, settings

from algcsp.algebra import FiniteAlgebra
from algcsp.catalog import cibs_up_to, example_a, fixture, s2, simple4, sq3

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")


@pytest.fixture(scope="session")
def catalog4():
    return cibs_up_to(4)


@pytest.fixture(scope="session")
def named():
    out = {n: fixture(n) for n in ("sq3", "s2", "t1", "t2", "example-a", "mass3", "majority", "xor")}
    out.update({f"a{i}": simple4(i) for i in range(7)})
    return out


@pytest.fixture
def rng():
    return random.Random(20261016)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k])
