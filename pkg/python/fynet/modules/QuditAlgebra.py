"""Generalized Pauli algebra, graph states and dense states/operators.

Conventions
-----------
- X|j⟩ = |j+1⟩ (shift), Z|j⟩ = ω^j|j⟩ (clock), ω = e^{2πi/d}; hence ZX = ωXZ.
- A Pauli string is ω2^p ⊗_k X^{x_k} Z^{z_k} with ω2 = e^{iπ/d} and p mod 2d.
- Sites are ordered row-major, site 0 being the most significant digit.
"""

from __future__ import annotations

import functools
import json
import typing
from dataclasses import dataclass

import numpy as np

from ..utils.envs import FY_MAX_DIMENSION
from ..utils.logger import logger
from .Multigraph import Multigraph, check_prime
from .Utilities import DimensionCapError, DimensionMismatchError, DomainError, PhaseConventionError

TOLERANCE = 1.0e-10


def check_dimension(dims: typing.Sequence[int]) -> int:
    total = int(np.prod(dims, dtype=np.int64)) if len(dims) > 0 else 1
    if total > FY_MAX_DIMENSION:
        raise DimensionCapError(f"Total dimension {total} exceeds the dense backend cap {FY_MAX_DIMENSION}")
    return total


def kron_all(ops: typing.Sequence[np.ndarray]) -> np.ndarray:
    return functools.reduce(np.kron, ops)


def omega(d: int) -> complex:
    return np.exp(2j * np.pi / d)


@dataclass(frozen=True, eq=False)
class DenseState:
    dims: typing.Tuple[int, ...]
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        dims = tuple(int(v) for v in self.dims)
        amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.size != check_dimension(dims):
            raise DimensionMismatchError(f"{amplitudes.size} amplitudes do not fit dims {dims}")
        if self.normalized and abs(np.linalg.norm(amplitudes) - 1.0) > 1.0e-12:
            raise DomainError(f"State is not normalized (norm={np.linalg.norm(amplitudes)})")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density(self) -> DenseOperator:
        return DenseOperator(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def to_dict(self) -> dict:
        return {"dims": list(self.dims), "amplitudes": [[float(v.real), float(v.imag)] for v in self.amplitudes]}

    @classmethod
    def from_dict(cls, desc: dict) -> DenseState:
        values = np.asarray(desc["amplitudes"], dtype=float)
        return cls(tuple(desc["dims"]), values[:, 0] + 1j * values[:, 1])

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


@dataclass(frozen=True, eq=False)
class DenseOperator:
    dims: typing.Tuple[int, ...]
    matrix: np.ndarray
    projector: bool = False

    def __post_init__(self):
        dims = tuple(int(v) for v in self.dims)
        total = check_dimension(dims)
        matrix = np.asarray(self.matrix, dtype=complex)
        if matrix.shape != (total, total):
            raise DimensionMismatchError(f"Matrix of shape {matrix.shape} does not fit dims {dims}")
        if self.projector:
            if not np.allclose(matrix, matrix.conj().T, atol=TOLERANCE) or not np.allclose(
                matrix @ matrix, matrix, atol=TOLERANCE
            ):
                raise DomainError("Operator flagged as projector is not Hermitian idempotent")
        matrix.setflags(write=False)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", matrix)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def expectation(self, rho: typing.Union[DenseOperator, DenseState]) -> complex:
        if isinstance(rho, DenseState):
            _match(self.dims, rho.dims)
            return complex(np.vdot(rho.amplitudes, self.matrix @ rho.amplitudes))
        _match(self.dims, rho.dims)
        return complex(np.einsum("ij,ji->", rho.matrix, self.matrix))

    def partial_trace(self, keep: typing.Sequence[int]) -> DenseOperator:
        keep = sorted(int(k) for k in keep)
        n = len(self.dims)
        tensor = self.matrix.reshape(self.dims + self.dims)
        for axis in sorted(set(range(n)) - set(keep), reverse=True):
            m = tensor.ndim // 2
            tensor = np.trace(tensor, axis1=axis, axis2=axis + m)
        dims = tuple(self.dims[k] for k in keep)
        total = int(np.prod(dims)) if dims else 1
        return DenseOperator(dims, tensor.reshape(total, total))

    def is_density(self, atol: float = TOLERANCE) -> bool:
        m = self.matrix
        if not np.allclose(m, m.conj().T, atol=atol) or abs(np.trace(m) - 1.0) > atol:
            return False
        return bool(np.linalg.eigvalsh((m + m.conj().T) / 2).min() > -atol)

    def to_dict(self) -> dict:
        return {
            "dims": list(self.dims),
            "matrix": np.stack([self.matrix.real, self.matrix.imag], axis=-1).tolist(),
        }

    @classmethod
    def from_dict(cls, desc: dict) -> DenseOperator:
        values = np.asarray(desc["matrix"], dtype=float)
        return cls(tuple(desc["dims"]), values[..., 0] + 1j * values[..., 1])

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _match(a: typing.Sequence[int], b: typing.Sequence[int]):
    if tuple(a) != tuple(b):
        raise DimensionMismatchError(f"Dimension mismatch: {tuple(a)} vs {tuple(b)}")


def load_state(text: str) -> typing.Union[DenseState, DenseOperator]:
    """Read a state or density operator from its JSON form."""
    desc = json.loads(text)
    if "amplitudes" in desc:
        return DenseState.from_dict(desc)
    if "matrix" in desc:
        return DenseOperator.from_dict(desc)
    raise DomainError("JSON holds neither 'amplitudes' nor 'matrix'")


@functools.lru_cache(maxsize=64)
def _shift(d: int) -> np.ndarray:
    return np.roll(np.eye(d, dtype=complex), 1, axis=0)


@functools.lru_cache(maxsize=64)
def _clock(d: int) -> np.ndarray:
    return np.diag(omega(d) ** np.arange(d))


def pauli_x(d: int) -> DenseOperator:
    if d < 2:
        raise DomainError(f"Local dimension must be >= 2, got {d}")
    return DenseOperator((d,), _shift(d))


def pauli_z(d: int) -> DenseOperator:
    if d < 2:
        raise DomainError(f"Local dimension must be >= 2, got {d}")
    return DenseOperator((d,), _clock(d))


@dataclass(frozen=True, eq=False)
class PauliString:
    d: int
    x: typing.Tuple[int, ...]
    z: typing.Tuple[int, ...]
    phase: int = 0
    """exponent of ω2 = e^{iπ/d}, mod 2d"""

    def __post_init__(self):
        d = check_prime(self.d)
        x = tuple(int(v) % d for v in self.x)
        z = tuple(int(v) % d for v in self.z)
        if len(x) != len(z):
            raise DimensionMismatchError(f"x and z exponents differ in length: {len(x)} vs {len(z)}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "phase", int(self.phase) % (2 * d))

    @property
    def n(self) -> int:
        return len(self.x)

    @classmethod
    def identity(cls, d: int, n: int) -> PauliString:
        return cls(d, (0,) * n, (0,) * n)

    @classmethod
    def with_unit_order(cls, d: int, x, z) -> PauliString:
        """The string X^x Z^z with the phase that makes its d-th power the identity."""
        bare = cls(d, x, z)
        q = bare.power(d).phase
        if q % d != 0:
            raise PhaseConventionError(f"No phase makes X^{x}Z^{z} of order {d}")
        return cls(d, x, z, (-(q // d)) % 2)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PauliString)
            and (self.d, self.x, self.z, self.phase) == (other.d, other.x, other.z, other.phase)
        )

    def __hash__(self) -> int:
        return hash((self.d, self.x, self.z, self.phase))

    def __repr__(self) -> str:
        return f"PauliString(d={self.d}, x={self.x}, z={self.z}, phase={self.phase})"

    def _check(self, other: PauliString):
        if self.d != other.d or self.n != other.n:
            raise DimensionMismatchError(f"Incompatible strings: (d={self.d}, n={self.n}) vs (d={other.d}, n={other.n})")

    def __mul__(self, other: PauliString) -> PauliString:
        # (X^a Z^b)(X^c Z^e) = ω^{bc} X^{a+c} Z^{b+e}
        self._check(other)
        cross = sum(b * c for b, c in zip(self.z, other.x))
        return PauliString(
            self.d,
            [a + c for a, c in zip(self.x, other.x)],
            [b + e for b, e in zip(self.z, other.z)],
            self.phase + other.phase + 2 * cross,
        )

    def power(self, k: int) -> PauliString:
        result = PauliString.identity(self.d, self.n)
        for _ in range(int(k) % (2 * self.d)):
            result = result * self
        return result

    def scaled(self, l: int) -> PauliString:
        """ω^l g"""
        return PauliString(self.d, self.x, self.z, self.phase + 2 * l)

    def commutation_phase(self, other: PauliString) -> int:
        """η with g h = ω^η h g."""
        self._check(other)
        return (sum(b * c for b, c in zip(self.z, other.x)) - sum(a * e for a, e in zip(self.x, other.z))) % self.d

    def commutes(self, other: PauliString) -> bool:
        return self.commutation_phase(other) == 0

    def is_identity(self) -> bool:
        return not any(self.x) and not any(self.z) and self.phase == 0

    def to_matrix(self) -> np.ndarray:
        d = self.d
        check_dimension((d,) * self.n)
        sites = [
            np.linalg.matrix_power(_shift(d), a) @ np.linalg.matrix_power(_clock(d), b) for a, b in zip(self.x, self.z)
        ]
        return np.exp(1j * np.pi * self.phase / d) * kron_all(sites)


def graph_stabilizer(graph: Multigraph, i: int) -> PauliString:
    """g_i = X_i ⊗_j Z_j^{Γ_ij}"""
    i = graph.check_vertex(i)
    x = np.zeros(graph.n, dtype=int)
    x[i] = 1
    return PauliString(graph.d, x, graph.gamma[i])


def stabilizer_element(graph: Multigraph, exponents: typing.Sequence[int]) -> PauliString:
    """∏_i g_i^{k_i}"""
    result = PauliString.identity(graph.d, graph.n)
    for i, k in enumerate(exponents):
        result = result * graph_stabilizer(graph, i).power(int(k) % graph.d)
    return result


def eigenspace_projector(g: PauliString) -> DenseOperator:
    """⌈g⌉ = (1/d) Σ_k g^k, the projector onto the +1 eigenspace of g."""
    if not g.power(g.d).is_identity():
        raise PhaseConventionError(f"{g} does not satisfy g^d = 1")
    dims = (g.d,) * g.n
    check_dimension(dims)
    total = sum(g.power(k).to_matrix() for k in range(g.d)) / g.d
    return DenseOperator(dims, total, projector=True)


def graph_state(graph: Multigraph) -> DenseState:
    """CZ^{Γ_jk} on every edge applied to |+⟩^{⊗n}."""
    d, n = graph.d, graph.n
    dims = (d,) * n
    total = check_dimension(dims)
    digits = np.indices(dims).reshape(n, -1)
    exponent = np.einsum("jm,jk,km->m", digits, np.triu(graph.gamma, 1), digits) % d
    return DenseState(dims, omega(d) ** exponent / np.sqrt(total))


def ghz_state(d: int, parties: int = 3) -> DenseState:
    if d < 2:
        raise DomainError(f"Local dimension must be >= 2, got {d}")
    dims = (d,) * parties
    amplitudes = np.zeros(check_dimension(dims), dtype=complex)
    stride = sum(d**k for k in range(parties))
    amplitudes[np.arange(d) * stride] = 1.0 / np.sqrt(d)
    return DenseState(dims, amplitudes)


def fidelity(psi: DenseState, rho: typing.Union[DenseOperator, DenseState]) -> float:
    """⟨ψ|ρ|ψ⟩"""
    _match(psi.dims, rho.dims)
    if isinstance(rho, DenseState):
        value = abs(np.vdot(psi.amplitudes, rho.amplitudes)) ** 2
    else:
        value = np.vdot(psi.amplitudes, rho.matrix @ psi.amplitudes).real
    return float(np.clip(value, 0.0, 1.0))


def expectation_projector(rho: typing.Union[DenseOperator, DenseState], g: PauliString) -> float:
    """Tr ρ⌈g⌉"""
    _match(rho.dims, (g.d,) * g.n)
    return float(np.clip(eigenspace_projector(g).expectation(rho).real, 0.0, 1.0))


def haar_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix with phase-fixed diagonal."""
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def random_density_matrix(rng: np.random.Generator, dim: int, rank: int = None) -> np.ndarray:
    rank = dim if rank is None else int(rank)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_pauli_string(rng: np.random.Generator, d: int, n: int) -> PauliString:
    while True:
        x, z = rng.integers(0, d, n), rng.integers(0, d, n)
        if np.any(x) or np.any(z):
            return PauliString.with_unit_order(d, x, z)


logger.debug("Qudit algebra ready")
