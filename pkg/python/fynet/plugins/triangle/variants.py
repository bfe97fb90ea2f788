"""Lower bounds on the GHZ_d fidelity for d that is not a perfect square.

- embedding: the k² labels of Protocol III with k = ⌊√d⌋ placed inside d levels, k/d
- projection: for d = k²-1, one label of Protocol III is folded onto a kept level
- x-family: as projection, with sources x|00⟩ + Σ_{i≥1} √((1-x²)/(k-1))|ii⟩, optimized over x
"""

import math
import typing

import numpy as np

from fynet.modules.QuditAlgebra import DenseState, fidelity, ghz_state
from fynet.modules.TriangleNetwork import (
    NodeChannel,
    ProtocolResult,
    TriangleProtocol,
    apply_local_channels,
    local_ghz_fidelity,
)
from fynet.modules.Utilities import DomainError, PreconditionError
from fynet.plugins.triangle.p3 import protocol3_state
from fynet.utils.logger import logger
from fynet.utils.optimize import maximize_scalar


def embedding_channel(k: int, d: int) -> NodeChannel:
    """Isometry of the k² levels into the first k² of d levels."""
    if k * k > d:
        raise PreconditionError(f"Cannot embed {k * k} levels into {d}")
    return NodeChannel(np.eye(d, k * k)[None, ...], (k, k), label=f"embed[{k * k}->{d}]")


def truncation_channel(D: int, d: int, input_dims: typing.Tuple[int, int] = None) -> NodeChannel:
    """Keep the last d of D levels; each dropped level goes to output |0⟩."""
    if not (1 <= d <= D):
        raise PreconditionError(f"Truncation needs 1 <= d <= D, got d={d}, D={D}")
    drop = D - d
    kraus = [np.eye(d, D, drop)]
    for m in range(drop):
        op = np.zeros((d, D))
        op[0, m] = 1.0
        kraus.append(op)
    return NodeChannel(np.stack(kraus), input_dims or (D, 1), label=f"truncate[{D}->{d}]")


def _square_root_of_successor(d: int) -> int:
    k = math.isqrt(d + 1)
    if k * k != d + 1 or k < 2:
        raise PreconditionError(f"d + 1 must be a perfect square k² with k >= 2, got d={d}")
    return k


def x_family_state(k: int, x: float) -> DenseState:
    if k < 2:
        raise PreconditionError(f"x-family needs k >= 2, got {k}")
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"x must lie in [0, 1], got {x}")
    w = np.full(k, np.sqrt((1.0 - x * x) / (k - 1)))
    w[0] = x
    return protocol3_state(k, w)


def embedding_fidelity(d: int) -> float:
    if d < 2:
        raise DomainError(f"Dimension must be >= 2, got {d}")
    k = math.isqrt(d)
    if k < 2:
        # d < 4: a product state already reaches 1/d
        return 1.0 / d
    state = protocol3_state(k)
    if k * k == d:
        return fidelity(ghz_state(d, 3), state)
    return local_ghz_fidelity(state, [embedding_channel(k, d)] * 3)


def _projected(state: DenseState, k: int, d: int) -> float:
    return local_ghz_fidelity(state, [truncation_channel(k * k, d, (k, k))] * 3)


def projection_fidelity(d: int) -> float:
    k = _square_root_of_successor(d)
    return _projected(protocol3_state(k), k, d)


def x_family_fidelity(d: int, x: float) -> float:
    k = _square_root_of_successor(d)
    return _projected(x_family_state(k, x), k, d)


def x_family_optimize(d: int) -> typing.Tuple[float, float]:
    """(best fidelity, best x)"""
    return maximize_scalar(lambda x: x_family_fidelity(d, x), (0.0, 1.0))


def protocol3_variants(d: int, with_state: bool = False) -> ProtocolResult:
    """Best of the available lower bounds for GHZ_d, with the state that reaches it."""
    if d < 2:
        raise DomainError(f"Dimension must be >= 2, got {d}")

    bounds = {"embedding": embedding_fidelity(d)}
    x_star = None

    successor = math.isqrt(d + 1)
    if successor >= 2 and successor * successor == d + 1:
        bounds["projection"] = projection_fidelity(d)
        bounds["x_family"], x_star = x_family_optimize(d)

    witness = max(bounds, key=bounds.get)

    logger.info(f"Variants for d={d}: " + ", ".join(f"{name}={value:.6f}" for name, value in bounds.items()))

    rho = None
    if with_state:
        k = math.isqrt(d)
        if witness == "embedding" and k >= 2:
            state = protocol3_state(k)
            rho = state.density() if k * k == d else apply_local_channels(state, [embedding_channel(k, d)] * 3)
        elif witness != "embedding":
            state = protocol3_state(successor) if witness == "projection" else x_family_state(successor, x_star)
            rho = apply_local_channels(state, [truncation_channel(d + 1, d, (successor, successor))] * 3)

    parameters = {"bounds": bounds, "witness": witness}
    if x_star is not None:
        parameters["x"] = x_star

    return ProtocolResult(protocol="variants", d=d, fidelity=bounds[witness], parameters=parameters, rho_out=rho)


class Protocol3Variants(TriangleProtocol):
    code = {
        "name": "variants",
        "description": "embedding, projection and x-family lower bounds for GHZ_d",
        "copyright": "fynet",
    }

    def run(self, d: int = 3, with_state: bool = False, **options) -> ProtocolResult:
        return protocol3_variants(d, with_state=with_state)


TriangleProtocol.register(["variants"], Protocol3Variants)
