"""Standard form under local complementation.

- the two hand-drawn examples have index 1 and 5 and are already standard
- K3 is never standard and standardizes with one LC at vertex 1
- random connected graphs: output is standard and the certificate replays
- exhaustive search agrees with the orbit of small graphs
- classification G0-G3
"""

import numpy as np
import pytest

from fynet.modules import StandardForm
from fynet.modules.Multigraph import Multigraph, fixture, lc_replay, random_connected_graph
from fynet.modules.StandardForm import classify, index_beta, is_standard, minimum_beta, standardize
from fynet.modules.Utilities import GraphNotConnectedError, PreconditionError


def test_examples_are_standard():
    assert is_standard(fixture("tree3"), 0, 1)
    assert index_beta(fixture("tree3"), 0, 1) == 1
    assert is_standard(fixture("twin5"), 0, 1)
    assert index_beta(fixture("twin5"), 0, 1) == 5


def test_triangle_is_not_standard():
    g = fixture("k3")
    assert not any(is_standard(g, i, j) for i in range(3) for j in range(3) if i != j)


def test_star_index():
    assert index_beta(fixture("star"), 0, 1) == 1


def test_index_needs_adjacent_pair():
    with pytest.raises(PreconditionError):
        index_beta(fixture("tree3"), 1, 2)


def test_standardize_triangle():
    result = standardize(fixture("k3"))
    assert result.lc_sequence == ((0, 1),)
    assert result.pair == (0, 1)
    assert result.beta == 1
    assert result.graph.edges() == [(0, 1, 1), (0, 2, 1)]
    assert result.to_dict()["lc_sequence"] == [[1, 1]]


def test_standardize_keeps_standard_graph():
    result = standardize(fixture("tree3"))
    assert result.lc_sequence == ()
    assert result.beta == 1
    assert result.graph == fixture("tree3")


def test_preconditions():
    with pytest.raises(PreconditionError):
        standardize(Multigraph.from_edges(2, 3, [(1, 2)], one_based=True))
    with pytest.raises(GraphNotConnectedError):
        standardize(Multigraph.from_edges(4, 3, [(1, 2), (3, 4)], one_based=True))


def _check_random_graphs(rng, count):
    for _ in range(count):
        d = int(rng.choice([2, 3, 5]))
        g = random_connected_graph(rng, int(rng.integers(3, 8)), d, density=float(rng.uniform(0.2, 0.9)))
        result = standardize(g)
        v1, v2 = result.pair
        assert lc_replay(g, result.lc_sequence) == result.graph
        assert is_standard(result.graph, v1, v2)
        assert result.beta == index_beta(result.graph, v1, v2)
        assert result.beta % 2 == 1
        assert list(result.n2_trace) == sorted(result.n2_trace, reverse=True)


def test_random_graphs_certificate(rng):
    _check_random_graphs(rng, 60)


@pytest.mark.slow
def test_random_graphs_certificate_full(rng):
    _check_random_graphs(rng, 1000)


def test_exhaustive_not_worse(rng):
    for _ in range(10):
        g = random_connected_graph(rng, int(rng.integers(3, 5)), int(rng.choice([2, 3])))
        greedy = standardize(g)
        best = standardize(g, exhaustive=True)
        assert best.orbit_complete
        assert best.beta <= greedy.beta
        assert lc_replay(g, best.lc_sequence) == best.graph
        assert is_standard(best.graph, *best.pair)


def test_minimum_beta():
    assert minimum_beta(fixture("k3")) == 1
    assert minimum_beta(fixture("tree3")) == 1


def test_orbit_closed():
    orbit, parent, complete = StandardForm.lc_orbit(fixture("k3"))
    assert complete
    keys = {g.key() for g in orbit}
    assert len(keys) == len(orbit)
    for g in orbit:
        for l in range(3):
            assert StandardForm.lc_apply(g, l, 1).key() in keys


def test_exhaustive_limit():
    g = Multigraph.from_edges(7, 2, [(i, i + 1) for i in range(1, 7)], one_based=True)
    with pytest.raises(PreconditionError):
        standardize(g, exhaustive=True)


def test_classify():
    assert classify(fixture("tree3"), 0, 1).tag == "G0"
    assert classify(fixture("twin5"), 0, 1).tag == "G1"


def test_classify_twin():
    # pair (1, 2) whose only common neighbour 3 has N_2 \ {3} = N_3 \ {2} = {1, 4}
    g = Multigraph.from_edges(6, 3, [(1, 2), (1, 3), (1, 5), (1, 6), (2, 3), (2, 4), (3, 4)], one_based=True)
    cls = classify(g, 0, 1)
    assert cls.tag == "G2"
    assert cls.to_dict() == {"class": "G2", "witness": 3}


def test_classify_needs_two_outside_neighbours():
    with pytest.raises(PreconditionError):
        classify(fixture("k3"), 0, 1)


def test_result_is_immutable():
    result = standardize(fixture("k3"))
    with pytest.raises(Exception):
        result.beta = 3
    assert not result.graph.gamma.flags.writeable
    assert np.array_equal(result.graph.gamma, result.graph.gamma.T)
