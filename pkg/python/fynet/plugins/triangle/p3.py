"""GHZ of dimension k² from maximally entangled qudit pairs.

With |Ψ⟩ = Σ_i |ii⟩/√k on each source the nodes apply
A: SWAP, B: |i, j⟩ ↦ |i, j-i⟩, C: |j, i⟩ ↦ |j-i, i⟩, after which all
three nodes carry the same label (a, c) on the GHZ support.
"""

import typing

import numpy as np

from fynet.modules.QuditAlgebra import DenseState, check_dimension, fidelity, ghz_state
from fynet.modules.TriangleNetwork import (
    NodeChannel,
    ProtocolResult,
    TriangleProtocol,
    branch_amplitudes,
    network_tensor,
)
from fynet.modules.Utilities import DomainError, PreconditionError
from fynet.utils.logger import logger


def _permutation(k: int, image: typing.Callable[[int, int], typing.Tuple[int, int]]) -> np.ndarray:
    u = np.zeros((k * k, k * k))
    for i in range(k):
        for j in range(k):
            x, y = image(i, j)
            u[(x % k) * k + (y % k), i * k + j] = 1.0
    return u


def protocol3_channels(k: int) -> typing.Tuple[NodeChannel, NodeChannel, NodeChannel]:
    return (
        NodeChannel.from_unitary(_permutation(k, lambda i, j: (j, i)), (k, k), "swap"),
        NodeChannel.from_unitary(_permutation(k, lambda i, j: (i, j - i)), (k, k), "cp"),
        NodeChannel.from_unitary(_permutation(k, lambda j, i: (j - i, i)), (k, k), "cp-reversed"),
    )


def protocol3_state(k: int, weights: typing.Sequence[float] = None) -> DenseState:
    """Network state with sources Σ_i w_i|ii⟩ (uniform weights by default), parties of dimension k²."""
    if k < 2:
        raise PreconditionError(f"Protocol III needs k >= 2, got {k}")
    check_dimension((k * k,) * 3)
    w = np.full(k, 1.0 / np.sqrt(k)) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (k,) or abs(np.linalg.norm(w) - 1.0) > 1.0e-12:
        raise DomainError(f"Source weights must be a unit vector of length {k}")
    source = np.diag(w).astype(complex)
    out = branch_amplitudes(protocol3_channels(k), network_tensor([source] * 3))
    return DenseState((k * k,) * 3, out[0, 0, 0].reshape(-1))


class Protocol3(TriangleProtocol):
    code = {
        "name": "p3",
        "description": "GHZ_{k^2} from maximally entangled qudit pairs and local permutations",
        "copyright": "fynet",
    }

    def run(self, k: int = 2, with_state: bool = True, **options) -> ProtocolResult:
        state = protocol3_state(k)
        value = fidelity(ghz_state(k * k, 3), state)
        logger.info(f"Protocol p3 with k={k}: fidelity {value:.12f}")
        return ProtocolResult(
            protocol="p3",
            d=k * k,
            fidelity=value,
            parameters={"k": k},
            rho_out=state.density() if with_state else None,
        )


TriangleProtocol.register(["p3"], Protocol3)
