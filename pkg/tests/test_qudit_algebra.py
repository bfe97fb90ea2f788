"""Generalized Pauli operators, graph states and dense states.

- X, Z for d = 2, 3, 5 and the commutation ZX = ωXZ
- Pauli strings: tracked phase agrees with the dense product
- ⌈g⌉ is a projector of trace d^{n-1}; ⌈g⌉⌈h⌉⌈g⌉ = ⌈g⌉/d when g, h do not commute
- graph states are stabilized by every g_i and every product of them
- fidelity and Tr ρ⌈g⌉ on simple states; F ≤ Tr ρ⌈g⌉
"""

import numpy as np
import pytest
from pytest import approx

from fynet.modules.Multigraph import Multigraph, fixture
from fynet.modules.QuditAlgebra import (
    DenseOperator,
    DenseState,
    PauliString,
    check_dimension,
    eigenspace_projector,
    expectation_projector,
    fidelity,
    ghz_state,
    graph_stabilizer,
    graph_state,
    haar_unitary,
    load_state,
    omega,
    pauli_x,
    pauli_z,
    random_density_matrix,
    random_pauli_string,
    stabilizer_element,
)
from fynet.modules.Utilities import DimensionCapError, DimensionMismatchError, PhaseConventionError


def test_qubit_paulis():
    assert np.allclose(pauli_x(2).matrix, [[0, 1], [1, 0]])
    assert np.allclose(pauli_z(2).matrix, [[1, 0], [0, -1]])


def test_shift_wraps_around():
    X = pauli_x(3).matrix
    assert np.allclose(X @ np.eye(3)[2], np.eye(3)[0])


@pytest.mark.parametrize("d", [2, 3, 5])
def test_clock_shift_commutation(d):
    X, Z = pauli_x(d).matrix, pauli_z(d).matrix
    assert np.allclose(Z @ X @ Z.conj().T @ X.conj().T, omega(d) * np.eye(d))


@pytest.mark.parametrize("d", [2, 3, 5])
def test_string_product_matches_matrices(rng, d):
    for _ in range(20):
        g, h = random_pauli_string(rng, d, 2), random_pauli_string(rng, d, 2)
        assert np.allclose((g * h).to_matrix(), g.to_matrix() @ h.to_matrix())
        eta = g.commutation_phase(h)
        assert np.allclose(g.to_matrix() @ h.to_matrix(), omega(d) ** eta * (h.to_matrix() @ g.to_matrix()))


def test_unit_order_for_qubits():
    y = PauliString.with_unit_order(2, [1], [1])
    assert np.allclose(np.linalg.matrix_power(y.to_matrix(), 2), np.eye(2))
    assert y.power(2).is_identity()


def test_projector_needs_unit_order():
    with pytest.raises(PhaseConventionError):
        eigenspace_projector(PauliString(2, [1], [1]))


def test_projector_of_identity_and_clock():
    assert np.allclose(eigenspace_projector(PauliString.identity(3, 2)).matrix, np.eye(9))
    assert np.allclose(eigenspace_projector(PauliString(3, [0], [1])).matrix, np.diag([1, 0, 0]))


@pytest.mark.parametrize("d", [2, 3, 5])
def test_projector_trace(rng, d):
    g = random_pauli_string(rng, d, 2)
    P = eigenspace_projector(g)
    assert P.trace().real == approx(d)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_noncommuting_projectors(d):
    g = PauliString.with_unit_order(d, [1, 1], [0, 0])
    h = PauliString.with_unit_order(d, [0, 0], [1, 0])
    assert not g.commutes(h)
    G, H = eigenspace_projector(g).matrix, eigenspace_projector(h).matrix
    assert np.allclose(G @ H @ G, G / d, atol=1.0e-10)


def test_graph_state_stabilizers(named_graph):
    psi = graph_state(named_graph)
    for i in range(named_graph.n):
        g = graph_stabilizer(named_graph, i)
        assert np.allclose(g.to_matrix() @ psi.amplitudes, psi.amplitudes, atol=1.0e-10)
        assert expectation_projector(psi, g) == approx(1.0)


def test_stabilizer_products(rng):
    g = fixture("tree3")
    psi = graph_state(g)
    for _ in range(10):
        s = stabilizer_element(g, rng.integers(0, g.d, g.n))
        assert expectation_projector(psi, s) == approx(1.0)
    k3 = fixture("k3")
    s = stabilizer_element(k3, [1, 1, 0])
    assert expectation_projector(graph_state(k3), s) == approx(1.0)


def test_empty_graph_is_product():
    psi = graph_state(Multigraph.empty(2, 3))
    assert np.allclose(psi.amplitudes, np.full(9, 1.0 / 3.0))


def test_single_edge_is_maximally_entangled():
    psi = graph_state(Multigraph.from_edges(2, 2, [(1, 2)], one_based=True))
    reduced = psi.density().partial_trace([0])
    assert np.allclose(reduced.matrix, np.eye(2) / 2)


def test_ghz():
    psi = ghz_state(2)
    assert np.allclose(psi.amplitudes[[0, 7]], 1.0 / np.sqrt(2.0))
    assert np.linalg.norm(ghz_state(9).amplitudes) == approx(1.0)
    assert fidelity(psi, psi) == approx(1.0)
    mixed = DenseOperator((2, 2, 2), np.eye(8) / 8)
    assert fidelity(psi, mixed) == approx(1.0 / 8.0)


def test_fidelity_of_orthogonal_states():
    a = DenseState((2,), [1, 0])
    b = DenseState((2,), [0, 1])
    assert fidelity(a, b) == 0.0
    with pytest.raises(DimensionMismatchError):
        fidelity(a, DenseState((3,), [1, 0, 0]))


def test_maximally_mixed_projector_average():
    g = PauliString(3, [1, 0], [0, 2])
    rho = DenseOperator((3, 3), np.eye(9) / 9)
    assert expectation_projector(rho, g) == approx(1.0 / 3.0)


def test_fidelity_below_projector_average(rng):
    graph = fixture("tree3")
    psi = graph_state(graph)
    for _ in range(10):
        rho = DenseOperator(psi.dims, random_density_matrix(rng, psi.dim))
        F = fidelity(psi, rho)
        for i in range(graph.n):
            assert F <= expectation_projector(rho, graph_stabilizer(graph, i)) + 1.0e-10


def test_haar_unitary(rng):
    u = haar_unitary(rng, 5)
    assert np.allclose(u.conj().T @ u, np.eye(5))


def test_dimension_cap():
    with pytest.raises(DimensionCapError):
        check_dimension((2,) * 21)


def test_state_json():
    psi = ghz_state(3)
    assert np.allclose(load_state(psi.to_json()).amplitudes, psi.amplitudes)
    rho = psi.density()
    assert np.allclose(load_state(rho.to_json()).matrix, rho.matrix)
