"""Fine-grained uncertainty relation for two projections with PQP = λP.

For such a pair the expectation values (⟨P⟩, ⟨Q⟩) of any state lie in the
convex hull of the ellipse

    ⟨2P-1⟩² + ⟨2Q-1⟩² + (2λ-1)² - 2(2λ-1)⟨2P-1⟩⟨2Q-1⟩ ≤ 1

and the two isolated points (0, 0) and (0, 1). Its upper boundary is f_λ.
"""

from __future__ import annotations

import functools
import typing
from dataclasses import dataclass

import numpy as np
import scipy.spatial

from ..utils.envs import FY_SEED
from ..utils.logger import logger
from .QuditAlgebra import (
    DenseOperator,
    DenseState,
    PauliString,
    eigenspace_projector,
    haar_unitary,
    random_density_matrix,
)
from .Utilities import DimensionMismatchError, DomainError, NonCommutingError

CONSTRUCTION_TOLERANCE = 1.0e-12

IDENTITY_TOLERANCE = 1.0e-10

SLACK = 1.0e-9


def _check_lambda(lam: float) -> float:
    if not (0.0 < lam < 1.0):
        raise DomainError(f"λ must lie in (0, 1), got {lam}")
    return float(lam)


def _check_unit(name: str, x: float) -> float:
    if not (-SLACK <= x <= 1.0 + SLACK):
        raise DomainError(f"{name} must lie in [0, 1], got {x}")
    return float(np.clip(x, 0.0, 1.0))


def f_lambda(lam: float, x: float) -> float:
    """Largest ⟨Q⟩ compatible with ⟨P⟩ = x."""
    lam = _check_lambda(lam)
    x = _check_unit("x", x)
    if x <= lam:
        return 1.0
    return 1.0 - (np.sqrt((1.0 - lam) * x) - np.sqrt(lam * (1.0 - x))) ** 2


@dataclass(frozen=True, eq=False)
class ProjectionPair:
    P: DenseOperator
    Q: DenseOperator
    lam: float
    common_dims: typing.Optional[typing.Tuple[int, int]] = None
    """ranks of the common (P,Q)=(0,0) and (0,1) eigenspaces, when known"""

    def __post_init__(self):
        _check_lambda(self.lam)
        if self.P.dims != self.Q.dims:
            raise DimensionMismatchError(f"P and Q act on different spaces: {self.P.dims} vs {self.Q.dims}")
        for name, op in (("P", self.P), ("Q", self.Q)):
            m = op.matrix
            if not np.allclose(m, m.conj().T, atol=IDENTITY_TOLERANCE) or not np.allclose(m @ m, m, atol=IDENTITY_TOLERANCE):
                raise DomainError(f"{name} is not a projector")
        P, Q = self.P.matrix, self.Q.matrix
        residual = np.linalg.norm(P @ Q @ P - self.lam * P)
        if residual > SLACK:
            raise DomainError(f"PQP ≠ λP (residual {residual:.3e})")

    @property
    def dims(self) -> typing.Tuple[int, ...]:
        return self.P.dims

    @property
    def rank(self) -> int:
        return int(round(self.P.trace().real))

    @classmethod
    def from_pauli(cls, g: PauliString, h: PauliString) -> ProjectionPair:
        """⌈g⌉, ⌈h⌉ of two noncommuting strings satisfy PQP = P/d."""
        if g.commutes(h):
            raise DomainError("Commuting strings do not form a projection pair with λ < 1")
        return cls(eigenspace_projector(g), eigenspace_projector(h), 1.0 / g.d)


def _canonical_blocks(lam: float, R: int, common_dims: typing.Tuple[int, int]):
    n00, n01 = common_dims
    dim = 2 * R + n00 + n01
    P = np.zeros((dim, dim))
    Q = np.zeros((dim, dim))
    v = np.array([np.sqrt(lam), np.sqrt(1.0 - lam)])
    for k in range(R):
        P[2 * k, 2 * k] = 1.0
        Q[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = np.outer(v, v)
    for k in range(2 * R + n00, dim):
        Q[k, k] = 1.0
    return P, Q


def random_projection_pair(
    seed: typing.Union[int, np.random.Generator],
    lam: float,
    block_count: int = 1,
    common_dims: typing.Tuple[int, int] = (0, 0),
) -> ProjectionPair:
    """Canonical pair (Q_λ ⊗ I_R) ⊕ Π_1, P_0 ⊗ I_R conjugated by a Haar-random unitary."""
    lam = _check_lambda(lam)
    if block_count < 1:
        raise DomainError(f"block_count must be >= 1, got {block_count}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    P, Q = _canonical_blocks(lam, int(block_count), tuple(int(v) for v in common_dims))
    U = haar_unitary(rng, P.shape[0])
    dims = (P.shape[0],)
    return ProjectionPair(
        DenseOperator(dims, U @ P @ U.conj().T),
        DenseOperator(dims, U @ Q @ U.conj().T),
        lam,
        common_dims=tuple(common_dims),
    )


@dataclass(frozen=True, eq=False)
class BlockDecomposition:
    basis: np.ndarray
    """columns e_1, f_1, ..., e_R, f_R, then the common (0,0) and (0,1) eigenvectors"""

    block_count: int
    common_dims: typing.Tuple[int, int]
    d_values: np.ndarray
    """eigenvalues of (1-P)Q(1-P) on the partner space, all equal to 1-λ"""


def block_decompose(pair: ProjectionPair) -> BlockDecomposition:
    """Basis in which P and Q take their canonical block form."""
    lam = pair.lam
    P, Q = pair.P.matrix, pair.Q.matrix
    dim = P.shape[0]

    w, v = np.linalg.eigh(P)
    e = v[:, w > 0.5]
    R = e.shape[1]

    f = (np.eye(dim) - P) @ Q @ e / np.sqrt(lam * (1.0 - lam))

    d_values = np.linalg.eigvalsh(f.conj().T @ Q @ f) if R > 0 else np.zeros(0)

    span = np.empty((dim, 2 * R), dtype=complex)
    span[:, 0::2] = e
    span[:, 1::2] = f

    # orthonormal complement of span{e, f}
    w, v = np.linalg.eigh(np.eye(dim) - span @ span.conj().T)
    rest = v[:, w > 0.5]

    q_rest, u_rest = np.linalg.eigh(rest.conj().T @ Q @ rest)
    rest = rest @ u_rest
    n01 = int(np.count_nonzero(q_rest > 0.5))
    n00 = rest.shape[1] - n01

    basis = np.hstack([span, rest])

    P0, Q0 = _canonical_blocks(lam, R, (n00, n01))
    if not (
        np.allclose(basis.conj().T @ P @ basis, P0, atol=1.0e-9)
        and np.allclose(basis.conj().T @ Q @ basis, Q0, atol=1.0e-9)
    ):
        raise RuntimeError("Simultaneous block diagonalization failed to reach the canonical form")

    logger.debug(f"Block decomposition: R={R}, common=({n00}, {n01})")

    return BlockDecomposition(basis, R, (n00, n01), d_values)


def _expectations(pair: ProjectionPair, rho) -> typing.Tuple[float, float]:
    if isinstance(rho, DenseState):
        rho = rho.density()
    elif not isinstance(rho, DenseOperator):
        rho = DenseOperator(pair.dims, np.asarray(rho))
    p = float(np.clip(pair.P.expectation(rho).real, 0.0, 1.0))
    q = float(np.clip(pair.Q.expectation(rho).real, 0.0, 1.0))
    return p, q


def figur_check(pair: ProjectionPair, rho) -> typing.Tuple[float, float, bool]:
    """Both sides of √(1-⟨P⟩) ≥ √((1-λ)⟨Q⟩) - √(λ(1-⟨Q⟩))."""
    p, q = _expectations(pair, rho)
    lam = pair.lam
    lhs = float(np.sqrt(1.0 - p))
    rhs = float(np.sqrt((1.0 - lam) * q) - np.sqrt(lam * (1.0 - q)))
    return lhs, rhs, lhs >= rhs - SLACK


def ellipse_value(lam: float, p: float, q: float) -> float:
    """Left-hand side of the ellipse inequality; ≤ 1 inside."""
    a, b, c = 2.0 * p - 1.0, 2.0 * q - 1.0, 2.0 * lam - 1.0
    return a * a + b * b + c * c - 2.0 * c * a * b


@functools.lru_cache(maxsize=32)
def _region_hull(lam: float, samples: int = 20001) -> scipy.spatial.ConvexHull:
    """Convex hull of the pure single-block curve and the points (0,0), (0,1)."""
    theta = np.linspace(0.0, 2.0 * np.pi, samples)
    nx, nz = 2.0 * np.sqrt(lam * (1.0 - lam)), 2.0 * lam - 1.0
    p = (1.0 + np.cos(theta)) / 2.0
    q = (1.0 + nx * np.sin(theta) + nz * np.cos(theta)) / 2.0
    points = np.vstack([np.column_stack([p, q]), [[0.0, 0.0], [0.0, 1.0]]])
    return scipy.spatial.ConvexHull(points)


def ellipse_region_check(lam: float, p: float, q: float) -> bool:
    """Whether (p, q) is reachable: convex hull of the ellipse with (0,0) and (0,1)."""
    lam = _check_lambda(lam)
    p = _check_unit("p", p)
    q = _check_unit("q", q)
    if ellipse_value(lam, p, q) <= 1.0 + SLACK:
        return True
    # the sampled hull is inscribed, so allow the chord error
    equations = _region_hull(lam).equations
    return bool(np.all(equations[:, :2] @ [p, q] + equations[:, 2] <= 1.0e-7))


def symmetric_figur_check(lam: float, p: float, q: float) -> bool:
    """⟨P⟩ + ⟨Q⟩ - 2√(λ⟨P⟩⟨Q⟩) ≤ 1 - λ, valid when also QPQ = λQ."""
    lam = _check_lambda(lam)
    p = _check_unit("p", p)
    q = _check_unit("q", q)
    return p + q - 2.0 * np.sqrt(lam * p * q) <= 1.0 - lam + SLACK


def extremal_q(lam: float, x: float, samples: int = 20001) -> float:
    """Brute-force maximum of ⟨Q⟩ over states with ⟨P⟩ = x.

    Pure states of one two-dimensional block trace a closed curve; mixtures and
    the isolated points (0,0), (0,1) fill its convex hull, whose upper facets are
    intersected with the vertical line p = x.
    """
    lam = _check_lambda(lam)
    x = _check_unit("x", x)
    hull = _region_hull(lam, int(samples))
    normals, offsets = hull.equations[:, :2], hull.equations[:, 2]
    upper = normals[:, 1] > CONSTRUCTION_TOLERANCE
    return float(np.min((-offsets[upper] - normals[upper, 0] * x) / normals[upper, 1]))


def lemma2_check(g: PauliString, h: PauliString, rho) -> typing.Tuple[typing.Tuple[float, float, float], bool]:
    """Tr ρ⌈gh⌉ ≥ Tr ρ⌈g⌉ Tr ρ⌈h⌉ ≥ Tr ρ⌈g⌉ + Tr ρ⌈h⌉ - 1 for commuting g, h."""
    if not g.commutes(h):
        raise NonCommutingError(f"η(g, h) = {g.commutation_phase(h)} ≠ 0")
    if not isinstance(rho, (DenseState, DenseOperator)):
        rho = DenseOperator((g.d,) * g.n, np.asarray(rho))
    a = eigenspace_projector(g * h).expectation(rho).real
    b = eigenspace_projector(g).expectation(rho).real
    c = eigenspace_projector(h).expectation(rho).real
    triple = (float(a), float(b * c), float(b + c - 1.0))
    return triple, triple[0] >= triple[1] - SLACK and triple[1] >= triple[2] - SLACK


def figur_suite(
    samples: int = 1000,
    lambdas: typing.Sequence[float] = None,
    seed: int = FY_SEED,
    max_dim: int = 12,
) -> dict:
    """Randomized check of the uncertainty relation; returns pass counts and the worst slack."""
    rng = np.random.default_rng(seed)
    passed, worst = 0, np.inf
    for k in range(samples):
        lam = float(lambdas[k % len(lambdas)]) if lambdas else float(rng.uniform(0.05, 0.95))
        R = int(rng.integers(1, max_dim // 2 + 1))
        spare = max_dim - 2 * R
        n00 = int(rng.integers(0, spare + 1))
        n01 = int(rng.integers(0, spare - n00 + 1))
        pair = random_projection_pair(rng, lam, R, (n00, n01))
        dim = pair.P.dim
        rho = DenseOperator(pair.dims, random_density_matrix(rng, dim, int(rng.integers(1, dim + 1))))
        lhs, rhs, holds = figur_check(pair, rho)
        passed += int(holds)
        worst = min(worst, lhs - rhs)
    logger.info(f"FiGUR suite: {passed}/{samples} passed, worst slack {worst:.3e}")
    return {"seed": int(seed), "samples": int(samples), "passed": passed, "failed": samples - passed, "worst_slack": float(worst)}
