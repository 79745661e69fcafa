"""Session fixtures: the golden-mean pair and its boundary clouds are costly."""

import numpy as np
import pytest

from herman_lab.cfrac import RotationNumber
from herman_lab.circle import tune
from herman_lab.dynamics import QuadraticSiegel
from herman_lab.geometry import best_limit, boundary_cloud, julia_cloud, scaling_factor

CLOUD_N = 10**6


@pytest.fixture(scope="session")
def golden():
    return RotationNumber.golden()


@pytest.fixture(scope="session")
def silver():
    return RotationNumber.silver()


@pytest.fixture(scope="session")
def P(golden):
    return QuadraticSiegel(golden)


@pytest.fixture(scope="session")
def tuned(golden):
    return tune(0.2, golden)


@pytest.fixture(scope="session")
def f(tuned):
    return tuned.to_map()


@pytest.fixture(scope="session")
def L_hat(P, f):
    return best_limit(scaling_factor(P, f, range(5, 23)))


@pytest.fixture(scope="session")
def cloud_P(P):
    return boundary_cloud(P, P.omega, CLOUD_N)


@pytest.fixture(scope="session")
def cloud_f(f):
    return boundary_cloud(f, f.omega2, CLOUD_N)


@pytest.fixture(scope="session")
def julia_P(P, cloud_P):
    return julia_cloud(cloud_P, P)


@pytest.fixture(scope="session")
def julia_f(f, cloud_f):
    return julia_cloud(cloud_f, f)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --- acceptance summary ---------------------------------------------------------

CRITERIA = 13
_LINES = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_LINES] = {}


@pytest.fixture
def criterion(request):
    """``criterion(number, title, ok, detail)`` records one acceptance line."""

    def record(number, title, ok, detail=""):
        line = f"criterion {number:2d}  {'PASS' if ok else 'FAIL'}  {title}  {detail}".rstrip()
        request.config.stash[_LINES][number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, {})
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k in range(1, CRITERIA + 1):
        terminalreporter.write_line(lines.get(k, f"criterion {k:2d}  ----  (not run)"))
