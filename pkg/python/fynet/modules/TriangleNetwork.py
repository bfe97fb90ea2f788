"""Triangle network with three bipartite sources and one local channel per node.

Wiring
------
Nodes are A=0, B=1, C=2. Source ``s`` connects node ``s`` (its first particle)
with node ``s-1 mod 3`` (its second particle). Node ``i`` therefore receives

    (first particle of source i, second particle of source i+1)

in that order, i.e. A = (s0[0], s1[1]), B = (s1[0], s2[1]), C = (s2[0], s0[1]).
"""

from __future__ import annotations

import itertools
import typing
from dataclasses import dataclass, field

import numpy as np

from ..utils.envs import FY_RESTARTS, FY_SEED
from ..utils.logger import logger
from .QuditAlgebra import DenseOperator, DenseState, check_dimension, ghz_state
from .Utilities import DimensionMismatchError, DomainError, Module

TRACE_TOLERANCE = 1.0e-10

EIGEN_CUTOFF = 1.0e-14


@dataclass(frozen=True, eq=False)
class SourceCoefficients:
    """Schmidt coefficients of the three sources Σ_j α_j|jj⟩, Σ_j β_j|jj⟩, Σ_j γ_j|jj⟩."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        vectors = [np.asarray(v, dtype=float).reshape(-1) for v in (self.alpha, self.beta, self.gamma)]
        if len({v.size for v in vectors}) != 1:
            raise DimensionMismatchError(f"Coefficient vectors differ in length: {[v.size for v in vectors]}")
        for name, v in zip(("alpha", "beta", "gamma"), vectors):
            if np.any(v < 0.0):
                raise DomainError(f"{name} has negative entries")
            if abs(np.linalg.norm(v) - 1.0) > 1.0e-9:
                raise DomainError(f"{name} is not normalized (norm={np.linalg.norm(v)})")
            v.setflags(write=False)
        object.__setattr__(self, "alpha", vectors[0])
        object.__setattr__(self, "beta", vectors[1])
        object.__setattr__(self, "gamma", vectors[2])

    @property
    def t(self) -> int:
        return self.alpha.size

    @classmethod
    def from_array(cls, x: np.ndarray) -> SourceCoefficients:
        x = np.asarray(x, dtype=float)
        return cls(*(x / np.linalg.norm(x, axis=-1, keepdims=True)))

    @classmethod
    def uniform(cls, t: int) -> SourceCoefficients:
        v = np.full(t, 1.0 / np.sqrt(t))
        return cls(v, v, v)

    def as_array(self) -> np.ndarray:
        return np.vstack([self.alpha, self.beta, self.gamma])

    def sources(self) -> typing.List[np.ndarray]:
        """Source amplitude matrices, rows indexing the first particle."""
        return [np.diag(v).astype(complex) for v in (self.alpha, self.beta, self.gamma)]

    def to_dict(self) -> dict:
        return {"alpha": self.alpha.tolist(), "beta": self.beta.tolist(), "gamma": self.gamma.tolist()}


@dataclass(frozen=True, eq=False)
class NodeChannel:
    """Kraus family of one node, stacked as (count, output_dim, input_dim)."""

    kraus: np.ndarray
    input_dims: typing.Tuple[int, int]
    label: str = ""

    def __post_init__(self):
        kraus = np.asarray(self.kraus, dtype=complex)
        if kraus.ndim == 2:
            kraus = kraus[None, ...]
        input_dims = tuple(int(v) for v in self.input_dims)
        if kraus.ndim != 3 or kraus.shape[2] != int(np.prod(input_dims)):
            raise DimensionMismatchError(f"Kraus stack of shape {kraus.shape} does not act on {input_dims}")
        completeness = np.einsum("kij,kil->jl", kraus.conj(), kraus)
        error = np.abs(completeness - np.eye(kraus.shape[2])).max()
        if error > TRACE_TOLERANCE:
            raise DomainError(f"Channel {self.label} is not trace preserving (ΣK†K - 1 = {error:.3e})")
        kraus.setflags(write=False)
        object.__setattr__(self, "kraus", kraus)
        object.__setattr__(self, "input_dims", input_dims)

    @property
    def input_dim(self) -> int:
        return self.kraus.shape[2]

    @property
    def output_dim(self) -> int:
        return self.kraus.shape[1]

    @classmethod
    def from_unitary(cls, unitary: np.ndarray, input_dims: typing.Tuple[int, int], label: str = "") -> NodeChannel:
        return cls(np.asarray(unitary)[None, ...], input_dims, label)

    @classmethod
    def identity(cls, input_dims: typing.Tuple[int, int]) -> NodeChannel:
        return cls(np.eye(int(np.prod(input_dims)))[None, ...], input_dims, "identity")

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return np.einsum("kij,jl,kml->im", self.kraus, rho, self.kraus.conj())


@dataclass(eq=False)
class ProtocolResult:
    protocol: str
    d: int
    fidelity: float
    parameters: dict = field(default_factory=dict)
    rho_out: typing.Optional[DenseOperator] = None
    seed: typing.Optional[int] = None
    restarts: typing.Optional[int] = None
    gme: bool = field(init=False)
    """fidelity with GHZ_d above 1/d certifies genuine multipartite entanglement"""

    def __post_init__(self):
        self.fidelity = float(np.clip(self.fidelity, 0.0, 1.0))
        self.gme = bool(self.fidelity > 1.0 / self.d)

    def to_dict(self, with_state: bool = False) -> dict:
        desc = {
            "protocol": self.protocol,
            "d": self.d,
            "fidelity": self.fidelity,
            "gme": self.gme,
            "parameters": self.parameters,
        }
        if self.seed is not None:
            desc["seed"] = self.seed
        if self.restarts is not None:
            desc["restarts"] = self.restarts
        if with_state and self.rho_out is not None:
            desc["rho_out"] = self.rho_out.to_dict()
        return desc


def network_tensor(sources: typing.Sequence[np.ndarray]) -> np.ndarray:
    """Pure network state from three source amplitude matrices, shaped (D_A, D_B, D_C)."""
    s0, s1, s2 = (np.asarray(s, dtype=complex) for s in sources)
    check_dimension([s.size for s in (s0, s1, s2)])
    psi = np.einsum("af,cb,ed->abcdef", s0, s1, s2)
    a0, a1, b0, b1, c0, c1 = psi.shape
    return psi.reshape(a0 * a1, b0 * b1, c0 * c1)


def branch_amplitudes(channels: typing.Sequence[NodeChannel], psi: np.ndarray) -> np.ndarray:
    """(K_a ⊗ K_b ⊗ K_c)|ψ⟩ for every Kraus triple, shaped (n_A, n_B, n_C, d_A, d_B, d_C)."""
    ka, kb, kc = (ch.kraus for ch in channels)
    if psi.shape != (ka.shape[2], kb.shape[2], kc.shape[2]):
        raise DimensionMismatchError(f"State of shape {psi.shape} does not fit channel inputs")
    t = np.tensordot(ka, psi, axes=([2], [0]))
    t = np.tensordot(kb, t, axes=([2], [2]))
    t = np.tensordot(kc, t, axes=([2], [4]))
    return t.transpose(4, 2, 0, 5, 3, 1)


def branches_density(out: np.ndarray) -> np.ndarray:
    rows = out.reshape(-1, int(np.prod(out.shape[3:])))
    return rows.T @ rows.conj()


def branches_ghz_fidelity(out: np.ndarray) -> float:
    """Σ_branches |⟨GHZ_d|branch⟩|² without forming the density operator."""
    d = out.shape[3]
    if out.shape[4] != d or out.shape[5] != d:
        raise DimensionMismatchError(f"Node outputs {out.shape[3:]} are not all of dimension {d}")
    diagonal = np.einsum("klmxxx->klmx", out)
    return float(np.sum(np.abs(diagonal.sum(axis=-1)) ** 2) / d)


def _check_wiring(channels: typing.Sequence[NodeChannel], shapes: typing.Sequence[typing.Tuple[int, int]]):
    if len(channels) != 3 or len(shapes) != 3:
        raise DimensionMismatchError("The triangle has three nodes and three sources")
    for i, ch in enumerate(channels):
        expected = (shapes[i][0], shapes[(i + 1) % 3][1])
        if ch.input_dims != expected:
            raise DimensionMismatchError(f"Node {i} expects inputs {ch.input_dims}, the wiring delivers {expected}")


def _pure_components(source: DenseOperator) -> typing.List[typing.Tuple[float, np.ndarray]]:
    if len(source.dims) != 2:
        raise DimensionMismatchError(f"Source must be bipartite, got dims {source.dims}")
    w, v = np.linalg.eigh((source.matrix + source.matrix.conj().T) / 2)
    return [(float(w[k]), v[:, k].reshape(source.dims)) for k in range(w.size) if w[k] > EIGEN_CUTOFF]


def simulate_triangle(channels: typing.Sequence[NodeChannel], sources: typing.Sequence[DenseOperator]) -> DenseOperator:
    """Output of the three node channels applied to the three sources."""
    _check_wiring(channels, [s.dims for s in sources])

    dims = tuple(ch.output_dim for ch in channels)
    check_dimension(dims)

    rho = np.zeros((int(np.prod(dims)),) * 2, dtype=complex)
    for components in itertools.product(*(_pure_components(s) for s in sources)):
        weight = np.prod([p for p, _ in components])
        out = branch_amplitudes(channels, network_tensor([v for _, v in components]))
        rho += weight * branches_density(out)

    trace = np.trace(rho).real
    if abs(trace - 1.0) > TRACE_TOLERANCE:
        raise RuntimeError(f"Network output has trace {trace}")

    logger.debug(f"Triangle output on dims {dims}, {len(channels[0].kraus)}x{len(channels[1].kraus)}x{len(channels[2].kraus)} Kraus branches")

    return DenseOperator(dims, rho)


def simulate_pure(channels: typing.Sequence[NodeChannel], sources: typing.Sequence[np.ndarray]) -> DenseOperator:
    """As :func:`simulate_triangle` for pure sources given by amplitude matrices."""
    _check_wiring(channels, [np.shape(s) for s in sources])
    out = branch_amplitudes(channels, network_tensor(sources))
    return DenseOperator(out.shape[3:], branches_density(out))


def ghz_fidelity(channels: typing.Sequence[NodeChannel], sources: typing.Sequence[np.ndarray]) -> float:
    _check_wiring(channels, [np.shape(s) for s in sources])
    return branches_ghz_fidelity(branch_amplitudes(channels, network_tensor(sources)))


def apply_local_channels(state: typing.Union[DenseState, DenseOperator], channels: typing.Sequence[NodeChannel]):
    """Local channel on each of the three parties of ``state``; returns a DenseOperator."""
    if len(state.dims) != 3 or len(channels) != 3:
        raise DimensionMismatchError(f"Expected a three-party state, got dims {state.dims}")
    for i, ch in enumerate(channels):
        if ch.input_dim != state.dims[i]:
            raise DimensionMismatchError(f"Party {i} has dimension {state.dims[i]}, channel expects {ch.input_dim}")
    dims = tuple(ch.output_dim for ch in channels)
    check_dimension(dims)
    if isinstance(state, DenseState):
        components = [(1.0, state.amplitudes)]
    else:
        w, v = np.linalg.eigh(state.matrix)
        components = [(float(w[k]), v[:, k]) for k in range(w.size) if w[k] > EIGEN_CUTOFF]
    rho = sum(p * branches_density(branch_amplitudes(channels, psi.reshape(state.dims))) for p, psi in components)
    return DenseOperator(dims, rho)


def local_ghz_fidelity(state: DenseState, channels: typing.Sequence[NodeChannel]) -> float:
    """GHZ fidelity of a pure three-party state after local channels, without the density operator."""
    return branches_ghz_fidelity(branch_amplitudes(channels, state.tensor()))


def target_fidelity(rho: DenseOperator, d: int) -> float:
    psi = ghz_state(d, 3)
    return float(np.clip(np.vdot(psi.amplitudes, rho.matrix @ psi.amplitudes).real, 0.0, 1.0))


class TriangleProtocol(Module):
    """Preparation protocol for a GHZ-like target on the triangle network."""

    _plugin_prefix = "fynet.plugins.triangle."

    code = {"name": "triangle", "description": "triangle network protocol"}

    def __init__(self, restarts: int = FY_RESTARTS, seed: int = FY_SEED, **parameters):
        super().__init__(restarts=restarts, seed=seed, **parameters)
        self.restarts = int(restarts)
        self.seed = int(seed)

    def run(self, **options) -> ProtocolResult:
        raise NotImplementedError(f"{self.__class__.__name__}.run")


__all__ = [
    "SourceCoefficients",
    "NodeChannel",
    "ProtocolResult",
    "TriangleProtocol",
    "simulate_triangle",
    "simulate_pure",
    "apply_local_channels",
    "ghz_fidelity",
    "local_ghz_fidelity",
    "target_fidelity",
]
