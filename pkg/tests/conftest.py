import numpy as np
import pytest

from srl import constructions as cons


@pytest.fixture(scope="session")
def bubble():
    return cons.bubble_form()


@pytest.fixture(scope="session")
def bhopf():
    return cons.bhopf_catalog()


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(2024)
