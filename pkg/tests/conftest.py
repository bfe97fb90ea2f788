import numpy as np
import pytest

from fynet.modules.Multigraph import fixture


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(params=["k3", "tree3", "twin5", "star", "path"])
def named_graph(request):
    return fixture(request.param)
