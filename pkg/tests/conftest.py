import numpy as np
import pytest

from prospector_eval import case_study_table


@pytest.fixture(scope="session")
def case1():
    return case_study_table(1)


@pytest.fixture(scope="session")
def case2():
    return case_study_table(2)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260816)
