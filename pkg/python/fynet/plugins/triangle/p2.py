"""Three-qutrit GHZ by sequential sifting of two-qubit pairs.

Every source emits k qubit pairs. Node j reads its m-th pair as
(qubit shared with the next node, qubit shared with the previous node) and
measures {|00⟩⟨00|, 1 - |00⟩⟨00|}. On the second outcome it encodes
|01⟩, |11⟩, |10⟩ as |0+s_j⟩, |1+s_j⟩, |2+s_j⟩ (mod 3) and discards the
remaining pairs; on the first it moves on to pair m+1. If every pair reads
|00⟩ the node outputs |0⟩.
"""

import functools
import typing

import numpy as np

from fynet.modules.QuditAlgebra import check_dimension
from fynet.modules.TriangleNetwork import (
    NodeChannel,
    ProtocolResult,
    TriangleProtocol,
    ghz_fidelity,
    simulate_pure,
)
from fynet.modules.Utilities import DomainError, PreconditionError
from fynet.utils.envs import FY_RESTARTS, FY_SEED
from fynet.utils.logger import logger
from fynet.utils.optimize import maximize, maximize_scalar, multistart

ENCODING = {(0, 1): 0, (1, 1): 1, (1, 0): 2}

DEFAULT_SHIFTS = (0, 1, 2)


def protocol2_channel(j: int, k: int, shifts: typing.Sequence[int] = DEFAULT_SHIFTS) -> NodeChannel:
    """Sift-and-encode channel of node ``j`` on k pairs.

    Input particles follow the network wiring: the k qubits shared with the
    previous node, then the k qubits shared with the next node.
    """
    if j not in (0, 1, 2):
        raise DomainError(f"Node index must be 0, 1 or 2, got {j}")
    if k < 1:
        raise PreconditionError(f"At least one pair per source is needed, got k={k}")
    shift = int(shifts[j]) % 3

    # pair-major layout: (output, next_1, prev_1, ..., next_k, prev_k)
    kraus = []
    for m in range(k):
        for rest in np.ndindex(*(2,) * (2 * (k - m - 1))):
            op = np.zeros((3,) + (2,) * (2 * k))
            for (a, b), value in ENCODING.items():
                op[((value + shift) % 3,) + (0, 0) * m + (a, b) + rest] = 1.0
            kraus.append(op)
    final = np.zeros((3,) + (2,) * (2 * k))
    final[(0,) + (0,) * (2 * k)] = 1.0
    kraus.append(final)

    axes = [0] + [2 + 2 * m for m in range(k)] + [1 + 2 * m for m in range(k)]
    stack = np.stack([op.transpose(axes).reshape(3, 4**k) for op in kraus])

    return NodeChannel(stack, (2**k, 2**k), label=f"p2[j={j},k={k}]")


@functools.lru_cache(maxsize=16)
def _channels(k: int, shifts: typing.Tuple[int, int, int]) -> typing.Tuple[NodeChannel, ...]:
    return tuple(protocol2_channel(j, k, shifts) for j in range(3))


def sifting_fidelity(u: float, k: int) -> float:
    """GHZ_3 fidelity when every pair is √u|00⟩ + √(1-u)|11⟩.

    3u(1-u)²(1 + u³ + ... + u^{3(k-1)}) + u^{3k}/3
    """
    if not (0.0 <= u <= 1.0):
        raise DomainError(f"u must lie in [0, 1], got {u}")
    geometric = sum(u ** (3 * m) for m in range(k))
    return 3.0 * u * (1.0 - u) ** 2 * geometric + u ** (3 * k) / 3.0


def _source_matrix(pairs: typing.Sequence[np.ndarray]) -> np.ndarray:
    """Rows index the qubits sent to the source's first node, columns those sent to its second."""
    return functools.reduce(np.kron, pairs)


MAX_ENTANGLED = np.eye(2) / np.sqrt(2.0)


class _Layout(typing.NamedTuple):
    k: int
    free_pairs: bool
    pinned: typing.FrozenSet[int]

    @property
    def free_sources(self) -> typing.List[int]:
        return [s for s in range(3) if s not in self.pinned]

    @property
    def per_source(self) -> int:
        return self.k if self.free_pairs else 1

    @property
    def size(self) -> int:
        return 8 * self.per_source * len(self.free_sources)

    def sources(self, x: np.ndarray) -> typing.List[np.ndarray]:
        blocks = iter(np.asarray(x).reshape(-1, 8))
        result = []
        for s in range(3):
            if s in self.pinned:
                pairs = [MAX_ENTANGLED] * self.k
            else:
                pairs = []
                for _ in range(self.per_source):
                    v = next(blocks)
                    m = (v[:4] + 1j * v[4:]).reshape(2, 2)
                    pairs.append(m / np.linalg.norm(m))
                if not self.free_pairs:
                    pairs = pairs * self.k
            result.append(_source_matrix(pairs))
        return result

    def family(self, u: float) -> np.ndarray:
        v = np.zeros(8)
        v[0], v[3] = np.sqrt(u), np.sqrt(1.0 - u)
        return np.tile(v, self.per_source * len(self.free_sources))


def protocol2_optimize(
    k: int = 1,
    restarts: int = FY_RESTARTS,
    seed: int = FY_SEED,
    free_pairs: bool = False,
    pinned: typing.Iterable[int] = (),
    shifts: typing.Sequence[int] = DEFAULT_SHIFTS,
    with_state: bool = True,
) -> ProtocolResult:
    """Optimize the pair states of all three sources for GHZ_3 fidelity.

    Restart 0 starts from the best member of the √u|00⟩ + √(1-u)|11⟩ family.
    """
    if k < 1:
        raise PreconditionError(f"At least one pair per source is needed, got k={k}")
    check_dimension((4**k,) * 3)

    shifts = tuple(int(s) for s in shifts)
    if sorted(s % 3 for s in shifts) != [0, 1, 2]:
        raise DomainError(f"Shifts must be a permutation of (0, 1, 2), got {shifts}")

    layout = _Layout(int(k), bool(free_pairs), frozenset(int(s) for s in pinned))
    channels = _channels(layout.k, shifts)

    analytic, u_star = maximize_scalar(lambda u: sifting_fidelity(u, layout.k), (0.0, 1.0))

    logger.info(f"Optimize protocol p2 with k={k}, {restarts} restarts, seed={seed}; analytic start {analytic:.6f}")

    def objective(x: np.ndarray) -> float:
        return ghz_fidelity(channels, layout.sources(x))

    def run_one(rng: np.random.Generator, idx: int):
        if layout.size == 0:
            return objective(np.zeros(0)), np.zeros(0)
        x0 = layout.family(u_star) if idx == 0 else rng.standard_normal(layout.size)
        return maximize(objective, x0)

    best = multistart(run_one, seed, restarts, label=f"p2[k={k}]")

    sources = layout.sources(best.x)

    return ProtocolResult(
        protocol="p2",
        d=3,
        fidelity=best.value,
        parameters={
            "k": layout.k,
            "shifts": list(shifts),
            "free_pairs": layout.free_pairs,
            "pinned": sorted(layout.pinned),
            "u_analytic": u_star,
            "analytic_fidelity": analytic,
            "restart": best.restart,
        },
        rho_out=simulate_pure(channels, sources) if with_state else None,
        seed=int(seed),
        restarts=int(restarts),
    )


class Protocol2(TriangleProtocol):
    code = {
        "name": "p2",
        "description": "GHZ_3 by sequential sifting of qubit pairs",
        "copyright": "fynet",
    }

    def run(self, k: int = 1, **options) -> ProtocolResult:
        return protocol2_optimize(k, self.restarts, self.seed, **options)


TriangleProtocol.register(["p2"], Protocol2)
