import numpy as np
import pytest

from holdem_bayes.game import kuhn, leduc
from holdem_bayes.tree import get_tree


@pytest.fixture(scope="session")
def leduc_spec():
    return leduc()


@pytest.fixture(scope="session")
def kuhn_spec():
    return kuhn()


@pytest.fixture(scope="session")
def leduc_tree(leduc_spec):
    return get_tree(leduc_spec)


@pytest.fixture(scope="session")
def kuhn_tree(kuhn_spec):
    return get_tree(kuhn_spec)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
