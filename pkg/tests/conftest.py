import numpy as np
import pytest

from classcensus import _kernels
from classcensus.classnum import batch_class_numbers


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile every jitted kernel once so timed tests measure math, not JIT
    _kernels.warm_up()


@pytest.fixture(scope="session")
def table_1e4():
    return batch_class_numbers(10_000)


@pytest.fixture(scope="session")
def table_1e5():
    return batch_class_numbers(100_000, lanes=2)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260819)
