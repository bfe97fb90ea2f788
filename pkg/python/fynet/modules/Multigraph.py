from __future__ import annotations

import functools
import json
import pathlib
import typing
from dataclasses import dataclass

import networkx as nx
import numpy as np
import sympy

from ..utils.logger import logger
from .Utilities import CompositeModulusError, DomainError, PreconditionError, VertexRangeError


@functools.lru_cache(maxsize=256)
def check_prime(d: int) -> int:
    """Return ``d`` if it is a prime, raise :class:`CompositeModulusError` otherwise."""
    if int(d) != d or d < 2 or not sympy.isprime(int(d)):
        raise CompositeModulusError(f"Modulus must be a prime >= 2, got {d}")
    return int(d)


@dataclass(frozen=True)
class FieldElem:
    """Element of the prime field F_d."""

    value: int
    d: int

    def __post_init__(self):
        check_prime(self.d)
        object.__setattr__(self, "value", int(self.value) % self.d)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElem):
            if other.d != self.d:
                raise DomainError(f"Mixing F_{self.d} and F_{other.d}")
            return other.value
        return int(other) % self.d

    def __add__(self, other) -> FieldElem:
        return FieldElem(self.value + self._coerce(other), self.d)

    __radd__ = __add__

    def __sub__(self, other) -> FieldElem:
        return FieldElem(self.value - self._coerce(other), self.d)

    def __rsub__(self, other) -> FieldElem:
        return FieldElem(self._coerce(other) - self.value, self.d)

    def __mul__(self, other) -> FieldElem:
        return FieldElem(self.value * self._coerce(other), self.d)

    __rmul__ = __mul__

    def __neg__(self) -> FieldElem:
        return FieldElem(-self.value, self.d)

    def __truediv__(self, other) -> FieldElem:
        return self * FieldElem(self._coerce(other), self.d).inverse()

    def inverse(self) -> FieldElem:
        if self.value == 0:
            raise ZeroDivisionError(f"0 has no inverse in F_{self.d}")
        return FieldElem(pow(self.value, -1, self.d), self.d)

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElem):
            return self.d == other.d and self.value == other.value
        if isinstance(other, (int, np.integer)):
            return self.value == int(other) % self.d
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.value, self.d))

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.d})"


@dataclass(frozen=True, eq=False)
class Multigraph:
    """Multigraph over F_d given by its symmetric adjacency matrix.

    Vertices are 0-based; every report converts to 1-based labels.
    ``gamma`` is stored reduced mod d, read-only, with zero diagonal.
    """

    d: int
    gamma: np.ndarray

    def __post_init__(self):
        check_prime(self.d)

        gamma = np.array(self.gamma, dtype=np.int64)

        if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
            raise DomainError(f"Adjacency matrix must be square, got shape {gamma.shape}")

        gamma = np.mod(gamma, self.d)

        if not np.array_equal(gamma, gamma.T):
            raise DomainError("Adjacency matrix must be symmetric")

        if np.any(np.diag(gamma) != 0):
            raise DomainError("Self-loops are not allowed")

        gamma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)

    @property
    def n(self) -> int:
        return self.gamma.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, Multigraph) and self.d == other.d and np.array_equal(self.gamma, other.gamma)

    def __hash__(self) -> int:
        return hash((self.d, self.gamma.tobytes()))

    def __repr__(self) -> str:
        return f"Multigraph(d={self.d}, n={self.n}, edges={self.edges()})"

    def key(self) -> bytes:
        return self.gamma.tobytes()

    def weight(self, i: int, j: int) -> int:
        self.check_vertex(i)
        self.check_vertex(j)
        return int(self.gamma[i, j])

    def check_vertex(self, i: int) -> int:
        if not (0 <= int(i) < self.n):
            raise VertexRangeError(f"Vertex {i} out of range [0, {self.n})")
        return int(i)

    def edges(self) -> typing.List[typing.Tuple[int, int, int]]:
        """Edge list (i, j, multiplicity) with 0-based i < j."""
        ii, jj = np.nonzero(np.triu(self.gamma))
        return [(int(i), int(j), int(self.gamma[i, j])) for i, j in zip(ii, jj)]

    @classmethod
    def empty(cls, n: int, d: int) -> Multigraph:
        return cls(d, np.zeros((n, n), dtype=np.int64))

    @classmethod
    def from_edges(cls, n: int, d: int, edges: typing.Iterable[typing.Sequence[int]], one_based: bool = False):
        """Build from (i, j[, multiplicity]) entries; duplicate entries add up mod d."""
        check_prime(d)
        gamma = np.zeros((n, n), dtype=np.int64)
        offset = 1 if one_based else 0
        for edge in edges:
            if len(edge) not in (2, 3):
                raise DomainError(f"Illegal edge entry {edge}")
            i, j = int(edge[0]) - offset, int(edge[1]) - offset
            m = int(edge[2]) if len(edge) == 3 else 1
            for v in (i, j):
                if not (0 <= v < n):
                    raise VertexRangeError(f"Edge {tuple(edge)} refers to a vertex outside 1..{n}")
            if i == j:
                raise DomainError(f"Self-loop at vertex {i + offset} is not allowed")
            gamma[i, j] += m
            gamma[j, i] += m
        return cls(d, np.mod(gamma, d))

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_weighted_edges_from(self.edges())
        return g

    def to_dict(self) -> dict:
        return {"d": self.d, "n": self.n, "edges": [[i + 1, j + 1, m] for i, j, m in self.edges()]}

    @classmethod
    def from_dict(cls, desc: dict) -> Multigraph:
        try:
            d, n, edges = int(desc["d"]), int(desc["n"]), desc.get("edges", [])
        except (KeyError, TypeError, ValueError) as error:
            raise DomainError(f"Graph description needs integer 'd', 'n' and an 'edges' list: {error}") from error
        return cls.from_edges(n, d, edges, one_based=True)

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> Multigraph:
        try:
            desc = json.loads(text)
        except json.JSONDecodeError as error:
            raise DomainError(f"Malformed graph JSON: {error}") from error
        return cls.from_dict(desc)


def load_graph(path: typing.Union[str, pathlib.Path]) -> Multigraph:
    path = pathlib.Path(path)
    logger.info(f"Load graph from {path}")
    return Multigraph.from_json(path.read_text())


def save_graph(graph: Multigraph, path: typing.Union[str, pathlib.Path]) -> None:
    pathlib.Path(path).write_text(graph.to_json(indent=2))


def lc_apply(graph: Multigraph, l: int, a: typing.Union[int, FieldElem]) -> Multigraph:
    """Local complementation around ``l`` with weight ``a``: Γ'_ij = Γ_ij + a Γ_il Γ_jl (i ≠ j)."""
    l = graph.check_vertex(l)
    a = int(a.value if isinstance(a, FieldElem) else a) % graph.d
    if a == 0:
        return graph
    column = graph.gamma[:, l]
    gamma = graph.gamma + a * np.outer(column, column)
    np.fill_diagonal(gamma, 0)
    return Multigraph(graph.d, gamma)


def lc_replay(graph: Multigraph, sequence: typing.Iterable[typing.Tuple[int, int]]) -> Multigraph:
    for l, a in sequence:
        graph = lc_apply(graph, l, a)
    return graph


def neighborhood(graph: Multigraph, i: int) -> typing.FrozenSet[int]:
    i = graph.check_vertex(i)
    return frozenset(int(j) for j in np.flatnonzero(graph.gamma[i]))


def is_connected(graph: Multigraph) -> bool:
    if graph.n < 1:
        raise PreconditionError("Connectivity needs at least one vertex")
    return nx.is_connected(graph.to_networkx())


def fixture(name: str) -> Multigraph:
    """Small named graphs used in the documentation and tests.

    - ``k3``: triangle over F_2
    - ``tree3``: Γ_12=2, Γ_13=1 over F_3, index 1 under the pair (1, 2)
    - ``twin5``: pair (1, 2) with two common neighbours, each owning a neighbour outside N_2; index 5
    - ``star``: star with centre 1 and four leaves over F_3
    - ``path``: path 1-2-3-4 over F_5
    """
    graphs = {
        "k3": lambda: Multigraph.from_edges(3, 2, [(1, 2), (1, 3), (2, 3)], one_based=True),
        "tree3": lambda: Multigraph.from_edges(3, 3, [(1, 2, 2), (1, 3, 1)], one_based=True),
        "twin5": lambda: Multigraph.from_edges(
            5, 3, [(1, 2, 2), (1, 3), (1, 4), (2, 4), (1, 5), (2, 5, 2), (3, 4), (3, 5)], one_based=True
        ),
        "star": lambda: Multigraph.from_edges(5, 3, [(1, 2), (1, 3, 2), (1, 4), (1, 5)], one_based=True),
        "path": lambda: Multigraph.from_edges(4, 5, [(1, 2, 3), (2, 3), (3, 4, 4)], one_based=True),
    }
    try:
        return graphs[name]()
    except KeyError as error:
        raise DomainError(f"Unknown graph fixture '{name}', expected one of {sorted(graphs)}") from error


def random_connected_graph(rng: np.random.Generator, n: int, d: int, density: float = 0.5) -> Multigraph:
    """Random connected multigraph: a random spanning tree plus extra edges, multiplicities uniform in 1..d-1."""
    check_prime(d)
    gamma = np.zeros((n, n), dtype=np.int64)
    order = rng.permutation(n)
    for k in range(1, n):
        i, j = order[k], order[rng.integers(0, k)]
        gamma[i, j] = gamma[j, i] = rng.integers(1, d)
    for i in range(n):
        for j in range(i + 1, n):
            if gamma[i, j] == 0 and rng.random() < density:
                gamma[i, j] = gamma[j, i] = rng.integers(1, d)
    return Multigraph(d, gamma)
