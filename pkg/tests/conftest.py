import numpy as np
import pytest

from armdyn.model import LinkParams, RobotModel, load_model
from armdyn.spatial import RigidTransform, exp_so3


def random_rotation(rng):
    w = rng.normal(size=3)
    return exp_so3(w / np.linalg.norm(w), rng.uniform(-np.pi, np.pi))


def random_link(rng):
    # principal moments drawn so the triangle inequality holds
    a, b = rng.uniform(0.01, 0.1, 2)
    moments = np.array([a, b, rng.uniform(abs(a - b), a + b)])
    R = random_rotation(rng)
    return LinkParams(rng.uniform(0.3, 4.0), rng.normal(scale=0.15, size=3), R @ np.diag(moments) @ R.T)


def random_chain(rng, n=7, gravity=9.80665):
    frames = [RigidTransform(random_rotation(rng), rng.normal(scale=0.25, size=3)) for _ in range(n)]
    axes = [v / np.linalg.norm(v) for v in rng.normal(size=(n, 3))]
    links = [random_link(rng) for _ in range(n)]
    return RobotModel.from_chain(frames, axes, links, gravity, name="random")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def platform():
    return load_model("synthetic-7dof")


@pytest.fixture(scope="session")
def synthetic(platform):
    return platform.arm


@pytest.fixture(scope="session")
def sawyer():
    return load_model("sawyer-kinematics")


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
