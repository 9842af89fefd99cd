import numpy as np
import pytest

from ucp_locality.dataset import Dataset, Project, generate_synthetic


def make_project(pid, env=(3, 3, 3, 3, 3, 3, 3, 3), uaw=10.0, uucw=100.0,
                 tcf=1.0, ef=1.0, effort=2000.0, source="industrial"):
    return Project(id=pid, source=source, uaw=uaw, uucw=uucw, tcf=tcf,
                   ef=ef, env=tuple(env), effort=effort)


def make_dataset(projects, name="fixture"):
    return Dataset(tuple(projects), name=name)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_synthetic():
    return generate_synthetic(7, 24)


@pytest.fixture
def bench_synthetic():
    return generate_synthetic(42, 40)
