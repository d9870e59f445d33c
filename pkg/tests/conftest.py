import numpy as np
import pytest

from app.config.settings import BaseConfig
from app.constants import Topology
from app.lib.hamiltonian import HeisenbergSpec, heisenberg
from app.lib.sim import AnsatzSpec, build_ansatz


def pytest_collection_modifyitems(config, items):
    if BaseConfig.QTE_SLOW_TESTS:
        return
    skip_slow = pytest.mark.skip(reason="set QTE_SLOW_TESTS=true to run acceptance-scale checks")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_circuit():
    return build_ansatz(AnsatzSpec(n_qubits=3, repetitions=1))


@pytest.fixture
def chain3():
    return heisenberg(HeisenbergSpec(n=3, topology=Topology.CHAIN))


@pytest.fixture
def anyio_backend():
    return "asyncio"
