"""Three-qubit GHZ from Schmidt-diagonal sources of local dimension t.

Each node holds one particle of two sources, (a, b), and measures the blocks
{|a,b⟩, |a+1,b+1⟩} with min(a, b) even, levels ≥ t being absent. On block
(a, b) it keeps the qubit |σ⟩ ← |a+σ, b+σ⟩.
"""

import functools
import typing

import numpy as np
import pandas as pd

from fynet.modules.TriangleNetwork import (
    NodeChannel,
    ProtocolResult,
    SourceCoefficients,
    TriangleProtocol,
    simulate_pure,
)
from fynet.modules.Utilities import PreconditionError
from fynet.utils.envs import FY_RESTARTS, FY_SEED
from fynet.utils.logger import logger
from fynet.utils.optimize import multistart, sphere_ascent


def protocol1_measurement(t: int) -> typing.List[typing.List[typing.Tuple[int, int]]]:
    if t < 1:
        raise PreconditionError(f"Source dimension must be >= 1, got {t}")
    blocks = []
    for a in range(t):
        for b in range(t):
            if min(a, b) % 2 == 0:
                block = [(a, b)]
                if a + 1 < t and b + 1 < t:
                    block.append((a + 1, b + 1))
                blocks.append(block)
    return blocks


def protocol1_channel(t: int) -> NodeChannel:
    blocks = protocol1_measurement(t)
    kraus = np.zeros((len(blocks), 2, t * t))
    for k, block in enumerate(blocks):
        for sigma, (a, b) in enumerate(block):
            kraus[k, sigma, a * t + b] = 1.0
    return NodeChannel(kraus, (t, t), label=f"p1[t={t}]")


@functools.lru_cache(maxsize=32)
def _triples(t: int) -> typing.Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Index triples (a, b, c) with (a,b), (b,c), (c,a) all block heads."""
    a, b, c = np.meshgrid(np.arange(t), np.arange(t), np.arange(t), indexing="ij")
    even = lambda u, v: np.minimum(u, v) % 2 == 0
    mask = even(a, b) & even(b, c) & even(c, a)
    return a[mask], b[mask], c[mask]


def _fidelity_and_gradient(x: np.ndarray) -> typing.Tuple[float, np.ndarray]:
    t = x.shape[1]
    a, b, c = _triples(t)
    al, be, ga = (np.append(v, 0.0) for v in x)

    lower = be[b] * ga[c], al[a] * ga[c], al[a] * be[b]
    upper = be[b + 1] * ga[c + 1], al[a + 1] * ga[c + 1], al[a + 1] * be[b + 1]

    s = al[a] * lower[0] + al[a + 1] * upper[0]
    value = 0.5 * float(np.dot(s, s))

    grad = np.empty_like(x)
    for row, idx in enumerate((a, b, c)):
        g = np.bincount(idx, s * lower[row], minlength=t + 1) + np.bincount(idx + 1, s * upper[row], minlength=t + 1)
        grad[row] = g[:t]

    return value, grad


def protocol1_fidelity(coeffs: SourceCoefficients) -> float:
    """F_t = ½ Σ (Σ_σ α_{a+σ} β_{b+σ} γ_{c+σ})² over admissible triples (a, b, c)."""
    return _fidelity_and_gradient(coeffs.as_array())[0]


def protocol1_state(coeffs: SourceCoefficients):
    channel = protocol1_channel(coeffs.t)
    return simulate_pure([channel] * 3, coeffs.sources())


def protocol1_optimize(
    t: int,
    restarts: int = FY_RESTARTS,
    seed: int = FY_SEED,
    with_state: bool = True,
) -> ProtocolResult:
    if t < 2:
        raise PreconditionError(f"Protocol I needs t >= 2, got {t}")

    logger.info(f"Optimize protocol p1 with t={t}, {restarts} restarts, seed={seed}")

    def run_one(rng: np.random.Generator, idx: int):
        x0 = np.abs(rng.standard_normal((3, t))) + 1.0e-3
        return sphere_ascent(_fidelity_and_gradient, x0)

    best = multistart(run_one, seed, restarts, label=f"p1[t={t}]")

    coeffs = SourceCoefficients.from_array(np.maximum(best.x, 0.0))

    return ProtocolResult(
        protocol="p1",
        d=2,
        fidelity=protocol1_fidelity(coeffs),
        parameters={"t": t, "coefficients": coeffs.to_dict(), "restart": best.restart},
        rho_out=protocol1_state(coeffs) if with_state else None,
        seed=int(seed),
        restarts=int(restarts),
    )


def protocol1_sweep(
    t_values: typing.Iterable[int] = range(2, 13),
    restarts: int = FY_RESTARTS,
    seed: int = FY_SEED,
) -> pd.DataFrame:
    """Best-found fidelity per source dimension t."""
    rows = []
    for t in t_values:
        result = protocol1_optimize(t, restarts, seed, with_state=False)
        rows.append({"t": t, "fidelity": result.fidelity, "gme": result.gme})
    return pd.DataFrame(rows, columns=["t", "fidelity", "gme"])


class Protocol1(TriangleProtocol):
    code = {
        "name": "p1",
        "description": "GHZ_2 from Schmidt-diagonal sources by block measurement",
        "copyright": "fynet",
    }

    def run(self, t: int = 2, with_state: bool = True, **options) -> ProtocolResult:
        return protocol1_optimize(t, self.restarts, self.seed, with_state=with_state)

    def sweep(self, t_values: typing.Iterable[int] = range(2, 13)) -> pd.DataFrame:
        return protocol1_sweep(t_values, self.restarts, self.seed)


TriangleProtocol.register(["p1"], Protocol1)
