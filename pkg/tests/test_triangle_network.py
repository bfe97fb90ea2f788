"""Triangle network simulation and the preparation protocols.

- channels are trace preserving; wiring mismatches are rejected
- simulation output is a density operator with the expected marginals
- Protocol I: block pattern, closed form against full simulation, best-found values
- Protocol II: sift-and-encode channel, analytic family against simulation, optimizer start
- Protocol III: fidelity 1/k with GHZ_{k²}
- embedding, projection and x-family bounds for non-square d
"""

import numpy as np
import pytest
from pytest import approx

from fynet.modules.QuditAlgebra import DenseOperator, fidelity, ghz_state
from fynet.modules.TriangleNetwork import (
    NodeChannel,
    ProtocolResult,
    SourceCoefficients,
    TriangleProtocol,
    ghz_fidelity,
    simulate_pure,
    simulate_triangle,
    target_fidelity,
)
from fynet.modules.Utilities import DimensionMismatchError, DomainError, PreconditionError
from fynet.plugins.triangle.p1 import (
    protocol1_channel,
    protocol1_fidelity,
    protocol1_measurement,
    protocol1_optimize,
    protocol1_state,
)
from fynet.plugins.triangle.p2 import protocol2_channel, protocol2_optimize, sifting_fidelity
from fynet.plugins.triangle.p3 import protocol3_channels, protocol3_state
from fynet.plugins.triangle.variants import (
    embedding_fidelity,
    projection_fidelity,
    protocol3_variants,
    truncation_channel,
    x_family_fidelity,
    x_family_optimize,
)
from fynet.utils.optimize import maximize_scalar


def _source_operator(amplitudes: np.ndarray) -> DenseOperator:
    v = np.asarray(amplitudes, dtype=complex).reshape(-1)
    return DenseOperator(np.shape(amplitudes), np.outer(v, v.conj()))


def _pair(u: float) -> np.ndarray:
    return np.diag([np.sqrt(u), np.sqrt(1.0 - u)])


def _sifting_sources(u: float, k: int):
    source = _pair(u)
    for _ in range(k - 1):
        source = np.kron(source, _pair(u))
    return [source] * 3


def test_channel_must_be_trace_preserving():
    with pytest.raises(DomainError):
        NodeChannel(np.ones((1, 2, 4)), (2, 2))


def test_identity_channels_on_bell_pairs():
    bell = _source_operator(np.eye(2) / np.sqrt(2.0))
    rho = simulate_triangle([NodeChannel.identity((2, 2))] * 3, [bell] * 3)
    assert rho.dims == (4, 4, 4)
    assert rho.trace().real == approx(1.0)
    for party in range(3):
        assert np.allclose(rho.partial_trace([party]).matrix, np.eye(4) / 4)


def test_wiring_mismatch():
    bell = _source_operator(np.eye(2) / np.sqrt(2.0))
    qutrit = _source_operator(np.eye(3) / np.sqrt(3.0))
    with pytest.raises(DimensionMismatchError):
        simulate_triangle([NodeChannel.identity((2, 2))] * 3, [bell, qutrit, bell])


def test_source_coefficients_validation():
    with pytest.raises(DomainError):
        SourceCoefficients([1.0, 0.0], [-1.0, 0.0], [1.0, 0.0])
    with pytest.raises(DimensionMismatchError):
        SourceCoefficients([1.0, 0.0], [1.0], [1.0, 0.0])


def test_gme_flag():
    assert not ProtocolResult("p1", 2, 0.5).gme
    assert ProtocolResult("p1", 2, 0.5 + 1.0e-9).gme
    assert ProtocolResult("p2", 3, 0.34).gme


def test_measurement_pattern():
    assert protocol1_measurement(2) == [[(0, 0), (1, 1)], [(0, 1)], [(1, 0)]]
    assert [(0, 3)] in protocol1_measurement(4)
    for t in range(1, 9):
        blocks = protocol1_measurement(t)
        cells = [cell for block in blocks for cell in block]
        assert len(cells) == t * t == len(set(cells))


def test_protocol1_closed_form():
    assert protocol1_fidelity(SourceCoefficients.uniform(2)) == approx(7.0 / 16.0)
    assert protocol1_fidelity(SourceCoefficients.uniform(1)) == approx(0.5)


@pytest.mark.parametrize("t", [2, 3, 4])
def test_protocol1_closed_form_matches_simulation(rng, t):
    channel = protocol1_channel(t)
    for _ in range(5):
        coeffs = SourceCoefficients.from_array(np.abs(rng.standard_normal((3, t))))
        rho = simulate_triangle([channel] * 3, [_source_operator(s) for s in coeffs.sources()])
        assert rho.is_density()
        assert np.linalg.eigvalsh(rho.matrix).min() > -1.0e-10
        assert target_fidelity(rho, 2) == approx(protocol1_fidelity(coeffs), abs=1.0e-10)
        assert fidelity(ghz_state(2), protocol1_state(coeffs)) == approx(protocol1_fidelity(coeffs), abs=1.0e-10)


def test_protocol1_optimum_t2():
    result = protocol1_optimize(2, restarts=16, seed=11)
    assert result.fidelity == approx(0.51704, abs=1.0e-4)
    assert result.gme
    assert result.rho_out.is_density()
    assert target_fidelity(result.rho_out, 2) == approx(result.fidelity, abs=1.0e-10)


def test_protocol1_seed_determinism():
    a = protocol1_optimize(3, restarts=4, seed=5, with_state=False)
    b = protocol1_optimize(3, restarts=4, seed=5, with_state=False)
    assert a.fidelity == b.fidelity
    assert a.parameters == b.parameters


@pytest.mark.slow
@pytest.mark.parametrize("t, expected", [(6, 0.5479), (12, 0.548048)])
def test_protocol1_best_found(t, expected):
    result = protocol1_optimize(t, restarts=64, seed=7, with_state=False)
    assert result.fidelity == approx(expected, abs=1.0e-4)


@pytest.mark.slow
def test_protocol1_sweep_nondecreasing():
    frame = TriangleProtocol.create("p1", restarts=32, seed=7).sweep(range(2, 9))
    assert list(frame["t"]) == list(range(2, 9))
    assert np.all(np.diff(frame["fidelity"]) > -1.0e-6)


def test_protocol2_channel_shapes():
    ch = protocol2_channel(0, 1)
    assert ch.input_dims == (2, 2)
    assert ch.output_dim == 3
    assert len(ch.kraus) == 2
    assert np.allclose(np.einsum("kij,kil->jl", ch.kraus.conj(), ch.kraus), np.eye(4))


def test_protocol2_encoding():
    # the node reads (next, prev) = (0, 1), i.e. prev qubit 1 and next qubit 0 in wiring order
    ch = protocol2_channel(0, 1)
    rho = np.zeros((4, 4))
    rho[2, 2] = 1.0
    assert np.allclose(ch.apply(rho), np.diag([1.0, 0.0, 0.0]))


def test_protocol2_all_zero_input():
    ch = protocol2_channel(1, 2)
    rho = np.zeros((16, 16))
    rho[0, 0] = 1.0
    assert np.allclose(ch.apply(rho), np.diag([1.0, 0.0, 0.0]))


def test_protocol2_rejects_bad_node():
    with pytest.raises(DomainError):
        protocol2_channel(3, 1)


@pytest.mark.parametrize("k", [1, 2])
@pytest.mark.parametrize("u", [0.2, 0.355, 0.7])
def test_sifting_family_matches_simulation(k, u):
    channels = [protocol2_channel(j, k) for j in range(3)]
    assert ghz_fidelity(channels, _sifting_sources(u, k)) == approx(sifting_fidelity(u, k), abs=1.0e-10)


def test_product_sources_give_one_third():
    for k in (1, 2):
        channels = [protocol2_channel(j, k) for j in range(3)]
        assert ghz_fidelity(channels, _sifting_sources(1.0, k)) == approx(1.0 / 3.0)


def test_sifting_optimum():
    best1, u1 = maximize_scalar(lambda u: sifting_fidelity(u, 1), (0.0, 1.0))
    best2, _ = maximize_scalar(lambda u: sifting_fidelity(u, 2), (0.0, 1.0))
    assert best1 == approx(0.457977, abs=1.0e-5)
    assert u1 == approx(0.355051, abs=1.0e-4)
    assert best2 > best1
    limit = 2.0 * np.sqrt(3.0) - 3.0
    best3, u3 = maximize_scalar(lambda u: sifting_fidelity(u, 3), (0.0, 1.0))
    assert best3 == approx(limit, abs=1.0e-4)
    assert best3 < limit


def test_three_pairs_reach_limit():
    u = (np.sqrt(3.0) - 1.0) / 2.0
    channels = [protocol2_channel(j, 3) for j in range(3)]
    value = ghz_fidelity(channels, _sifting_sources(u, 3))
    assert value == approx(2.0 * np.sqrt(3.0) - 3.0, abs=1.0e-4)


def test_protocol2_optimizer_starts_from_family():
    result = protocol2_optimize(1, restarts=2, seed=3)
    assert result.fidelity >= result.parameters["analytic_fidelity"] - 1.0e-9
    assert result.gme
    assert result.rho_out.trace().real == approx(1.0)


def test_protocol2_optimizer_reaches_sifting_limit():
    result = protocol2_optimize(3, restarts=1, seed=7, with_state=False)
    assert result.d == 3
    assert result.fidelity == approx(2.0 * np.sqrt(3.0) - 3.0, abs=1.0e-4)
    assert result.gme


def test_protocol2_pinned_sources():
    result = protocol2_optimize(1, restarts=1, seed=3, pinned=(0, 1, 2), with_state=False)
    assert result.fidelity == approx(5.0 / 12.0)


def test_protocol2_shift_validation():
    with pytest.raises(DomainError):
        protocol2_optimize(1, restarts=1, shifts=(0, 0, 1))


@pytest.mark.parametrize("k", [2, 3])
def test_protocol3(k):
    state = protocol3_state(k)
    assert np.linalg.norm(state.amplitudes) == approx(1.0)
    assert fidelity(ghz_state(k * k), state) == approx(1.0 / k, abs=1.0e-12)


def test_protocol3_channels_are_permutations():
    for ch in protocol3_channels(3):
        u = ch.kraus[0]
        assert np.allclose(u @ u.T, np.eye(9))
        assert set(np.unique(u)) == {0.0, 1.0}


def test_protocol3_needs_k2():
    with pytest.raises(PreconditionError):
        protocol3_state(1)


def test_protocol3_plugin():
    result = TriangleProtocol.create("p3").run(k=2)
    assert result.d == 4
    assert result.fidelity == approx(0.5)
    assert result.gme
    assert result.rho_out.dims == (4, 4, 4)


def test_registry():
    with pytest.raises(PreconditionError):
        TriangleProtocol.create("p9")
    TriangleProtocol.create("variants")
    assert "variants" in TriangleProtocol.plugins()


def test_truncation_channel():
    ch = truncation_channel(4, 3, (2, 2))
    assert len(ch.kraus) == 2
    rho = np.zeros((4, 4))
    rho[0, 0] = 1.0
    assert np.allclose(ch.apply(rho), np.diag([1.0, 0.0, 0.0]))
    rho = np.zeros((4, 4))
    rho[3, 3] = 1.0
    assert np.allclose(ch.apply(rho), np.diag([0.0, 0.0, 1.0]))


def test_embedding_bounds():
    assert embedding_fidelity(2) == approx(0.5)
    assert embedding_fidelity(5) == approx(2.0 / 5.0)
    assert embedding_fidelity(8) == approx(2.0 / 8.0)
    assert embedding_fidelity(9) == approx(1.0 / 3.0)
    assert embedding_fidelity(10) == approx(3.0 / 10.0)


@pytest.mark.parametrize("k", [2, 3])
def test_projection_bound(k):
    d = k * k - 1
    assert projection_fidelity(d) == approx(((k * k - 1) ** 2 + 1) / (d * k**3))
    assert projection_fidelity(d) > np.floor(np.sqrt(d)) / d


def test_x_family():
    for x in (0.3, 1.0 / np.sqrt(2.0), 0.9):
        u = x * x
        assert x_family_fidelity(3, x) == approx(3.0 * u * (1.0 - u) ** 2 + u**3 / 3.0)
    best, x = x_family_optimize(3)
    assert best == approx(0.45798, abs=1.0e-4)


def test_variants_for_three():
    result = protocol3_variants(3, with_state=True)
    assert result.parameters["witness"] == "x_family"
    assert result.parameters["bounds"]["projection"] == approx(5.0 / 12.0)
    assert result.fidelity == approx(0.45798, abs=1.0e-4)
    assert target_fidelity(result.rho_out, 3) == approx(result.fidelity, abs=1.0e-8)
    assert result.gme


def test_variants_for_square():
    result = protocol3_variants(9)
    assert result.fidelity == approx(1.0 / 3.0)
    assert result.parameters["witness"] == "embedding"


def test_simulate_pure_matches_mixed():
    channels = protocol3_channels(2)
    source = np.eye(2) / np.sqrt(2.0)
    a = simulate_pure(channels, [source] * 3)
    b = simulate_triangle(channels, [_source_operator(source)] * 3)
    assert np.allclose(a.matrix, b.matrix)
