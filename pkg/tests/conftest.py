import pytest

from edgealloc.sysmodel import CostParams, ServerKind, ServerSpec, TaskSpec


def make_task(id=0, data_bytes=420_000.0, cycles=1.0, special=True, sensitivity=0.5,
              deadline=1.0, alpha=0.8, beta=0.2, rate=1e6, snr=10.0):
    return TaskSpec(id, data_bytes, cycles, special, sensitivity, deadline, alpha, beta, rate, snr)


@pytest.fixture
def params():
    return CostParams()


@pytest.fixture
def gpu():
    return ServerSpec(0, ServerKind.GPU, 100.0, 1.0)


@pytest.fixture
def cpu():
    return ServerSpec(1, ServerKind.CPU, 9.0, 0.1)
