"""Fidelity thresholds ub2 and ub1.

- closed-form values at d = 2 and the large-d limits
- ub2 below ub1 on the grid of the first 25 primes and odd β ≤ 21
- ub2 increases with β, decreases with d, and stays above (d+1)/(2d)
- gap ratio grows with β
- graph reports take β from the standard form
- fidelities reached by the triangle protocols stay below ub2 at β = 1
"""

import numpy as np
import pytest
from pytest import approx

from fynet.modules.FidelityBounds import bound_for_graph, compare, default_primes, detects, sweep, ub1, ub2
from fynet.modules.Multigraph import fixture
from fynet.modules.Utilities import CompositeModulusError, DomainError
from fynet.plugins.triangle.p1 import protocol1_optimize
from fynet.plugins.triangle.p2 import protocol2_optimize
from fynet.plugins.triangle.variants import protocol3_variants

PRIMES = default_primes(25)

BETAS = list(range(1, 22, 2))


def test_default_primes():
    assert PRIMES[:5] == [2, 3, 5, 7, 11]
    assert len(PRIMES) == 25
    assert PRIMES[-1] == 97


def test_qubit_values():
    assert ub2(2, 1) == approx(0.9)
    assert ub1(2, 1) == approx(1.0 - (np.sqrt(1.0 + 4.0 * np.sqrt(2.0) / (np.sqrt(2.0) + 1.0)) - 1.0) ** 2 / 16.0)
    assert ub1(2, 1) == approx(0.9571, abs=1.0e-4)


def test_large_d_limits():
    assert ub2(1000003, 1) == approx(2.0 / 3.0, abs=1.0e-3)
    assert ub1(1000003, 1) == approx((5.0 + np.sqrt(5.0)) / 8.0, abs=1.0e-3)
    assert compare(10007, 1).improvement == approx((4.0 - np.sqrt(5.0)) / (3.0 * np.sqrt(5.0)), abs=5.0e-3)


def test_beta5_prior_bound_is_weak():
    assert all(ub1(d, 5) > 0.99 for d in PRIMES)
    assert ub2(3, 5) < 0.99


def test_grid_ordering():
    for d in PRIMES:
        for beta in BETAS:
            u2 = ub2(d, beta)
            assert (d + 1) / (2 * d) < u2 < 1.0
            assert u2 < ub1(d, beta)
    for d in PRIMES:
        values = [ub2(d, beta) for beta in BETAS]
        assert np.all(np.diff(values) > 0)
    for beta in BETAS:
        values = [ub2(d, beta) for d in PRIMES]
        assert np.all(np.diff(values) < 0)


def test_gap_ratio_grows():
    ratios = [compare(3, beta).gap_ratio for beta in range(1, 100, 2)]
    assert np.all(np.diff(ratios) > 0)
    assert ratios[-1] > 10 * ratios[0]


def test_invalid_arguments():
    with pytest.raises(CompositeModulusError):
        ub2(4, 1)
    with pytest.raises(DomainError):
        ub2(3, 2)
    with pytest.raises(DomainError):
        ub1(3, 0)


def test_detection_is_strict():
    assert not detects(0.9, 2, 1)
    assert detects(0.95, 2, 1)


@pytest.mark.parametrize("name, beta", [("tree3", 1), ("twin5", 5), ("k3", 1)])
def test_graph_reports(name, beta):
    report = bound_for_graph(fixture(name))
    assert report.beta == beta
    assert report.ub2 == approx(ub2(report.d, beta))
    desc = report.to_dict()
    assert desc["standard_form"]["beta"] == beta


def test_sweep_frame():
    frame = sweep()
    assert list(frame.columns) == ["d", "beta", "ub1", "ub2", "improvement", "gap_ratio"]
    assert len(frame) == 50
    assert (frame["ub2"] < frame["ub1"]).all()
    small = sweep([2, 3], [1])
    assert small["ub2"].iloc[0] == approx(0.9)


def test_protocols_stay_below_threshold():
    p1 = protocol1_optimize(2, restarts=16, seed=11, with_state=False)
    assert p1.fidelity < ub2(2, 1)
    assert not detects(p1.fidelity, 2, 1)

    p2 = protocol2_optimize(1, restarts=2, seed=3, with_state=False)
    assert p2.d == 3
    assert p2.fidelity < ub2(3, 1)

    for d in (2, 3, 5, 7):
        result = protocol3_variants(d)
        assert result.fidelity < ub2(d, 1)
