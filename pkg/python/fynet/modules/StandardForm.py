"""Standard form of connected multigraphs under local complementation.

A graph is in standard form for the connected pair (v1, v2) when every vertex
of {v1} ∪ (N_v1 ∩ N_v2) has a neighbour different from v2 and disconnected
from v2. Such vertices are *good*; the others *bad*. The index of the form is
β = 2|N_v1 ∩ N_v2| + 1.

:func:`standardize` brings any connected graph with at least three vertices
into standard form by a sequence of local complementations, and returns the
sequence as a certificate that replays on the input.
"""

from __future__ import annotations

import collections
import typing
from dataclasses import dataclass

from ..utils.logger import logger
from .Multigraph import Multigraph, is_connected, lc_apply, lc_replay, neighborhood
from .Utilities import GraphNotConnectedError, PreconditionError

EXHAUSTIVE_MAX_VERTICES = 6

EXHAUSTIVE_MAX_ORBIT = 50000


@dataclass(frozen=True)
class StandardFormResult:
    graph: Multigraph
    pair: typing.Tuple[int, int]
    lc_sequence: typing.Tuple[typing.Tuple[int, int], ...]
    beta: int
    n2_trace: typing.Tuple[int, ...] = ()
    """|N_v2| after each neighbourhood-shrinking step"""

    exhaustive: bool = False
    orbit_complete: bool = True

    def to_dict(self) -> dict:
        return {
            "pair": [self.pair[0] + 1, self.pair[1] + 1],
            "beta": self.beta,
            "lc_sequence": [[l + 1, a] for l, a in self.lc_sequence],
            "graph": self.graph.to_dict(),
            "exhaustive": self.exhaustive,
            "orbit_complete": self.orbit_complete,
        }


@dataclass(frozen=True)
class GraphClass:
    tag: str
    """one of G0, G1, G2, G3"""

    witness: typing.Optional[int] = None
    weight: typing.Optional[int] = None

    def to_dict(self) -> dict:
        desc = {"class": self.tag}
        if self.witness is not None:
            desc["witness"] = self.witness + 1
        if self.weight is not None:
            desc["weight"] = self.weight
        return desc


def _check_preconditions(graph: Multigraph):
    if graph.n < 3:
        raise PreconditionError(f"Standard form needs at least 3 vertices, got {graph.n}")
    if not is_connected(graph):
        raise GraphNotConnectedError("Standard form is defined for connected graphs only")


def _check_adjacent(graph: Multigraph, v1: int, v2: int):
    if v1 == v2 or graph.weight(v1, v2) == 0:
        raise PreconditionError(f"Vertices {v1 + 1} and {v2 + 1} are not adjacent")


def is_good(graph: Multigraph, u: int, v2: int) -> bool:
    return any(w != v2 and graph.gamma[w, v2] == 0 for w in neighborhood(graph, u))


def is_standard(graph: Multigraph, v1: int, v2: int) -> bool:
    _check_preconditions(graph)
    graph.check_vertex(v1)
    graph.check_vertex(v2)
    return _is_standard(graph, v1, v2)


def _is_standard(graph: Multigraph, v1: int, v2: int) -> bool:
    if v1 == v2 or graph.gamma[v1, v2] == 0:
        return False
    candidates = {v1} | (neighborhood(graph, v1) & neighborhood(graph, v2))
    return all(is_good(graph, u, v2) for u in candidates)


def index_beta(graph: Multigraph, v1: int, v2: int) -> int:
    _check_adjacent(graph, v1, v2)
    return 2 * len(neighborhood(graph, v1) & neighborhood(graph, v2)) + 1


def _find_subtree(graph: Multigraph) -> typing.Optional[typing.Tuple[int, int, int]]:
    """Lexicographically smallest (v1, v2, v3) with v1 adjacent to v2, v3 and v2, v3 disconnected."""
    for v1 in range(graph.n):
        nbrs = sorted(neighborhood(graph, v1))
        for v2 in nbrs:
            for v3 in nbrs:
                if v3 != v2 and graph.gamma[v2, v3] == 0:
                    return v1, v2, v3
    return None


def _ratio(graph: Multigraph, num: int, den: int) -> int:
    return (-num * pow(den, -1, graph.d)) % graph.d


def standardize(graph: Multigraph, exhaustive: bool = False, max_orbit: int = EXHAUSTIVE_MAX_ORBIT):
    """LC-equivalent standard form of ``graph`` with its certificate sequence.

    With ``exhaustive`` the whole LC orbit (n ≤ 6) is searched for the
    standard form of minimum index instead.
    """
    _check_preconditions(graph)

    if exhaustive:
        return _standardize_exhaustive(graph, max_orbit)

    sequence = []

    triple = _find_subtree(graph)

    if triple is None:
        # every neighbourhood is a clique, so the graph is complete
        a = _ratio(graph, int(graph.gamma[1, 2]), int(graph.gamma[0, 1] * graph.gamma[0, 2]))
        graph = lc_apply(graph, 0, a)
        sequence.append((0, a))
        logger.debug(f"Break triangle (1, 2, 3) by LC at vertex 1 with weight {a}")
        triple = _find_subtree(graph)
        if triple is None:
            raise RuntimeError("Triangle breaking left no subtree")

    v1, v2, v3 = triple

    n2_trace = [len(neighborhood(graph, v2))]

    while True:
        common = sorted(neighborhood(graph, v1) & neighborhood(graph, v2))

        bad = [u for u in common if not is_good(graph, u, v2)]

        if len(bad) == 0:
            break

        u = bad[0]

        others = sorted(neighborhood(graph, u) - {v2})

        weights = {w: _ratio(graph, int(graph.gamma[v2, w]), int(graph.gamma[v2, u] * graph.gamma[u, w])) for w in others}

        if len(set(weights.values())) == 1:
            a = weights[others[0]]
            graph = lc_apply(graph, u, a)
            sequence.append((u, a))
            logger.debug(f"Constant weight {a} around vertex {u + 1}: re-seat pair to ({u + 1}, {v2 + 1})")
            v1, v3 = u, v1
            continue

        good_before = [x for x in common if x != u and is_good(graph, x, v2)]

        w = min(x for x in others if weights[x] != weights[v1])
        a = weights[w]

        size = len(neighborhood(graph, v2))
        graph = lc_apply(graph, u, a)
        sequence.append((u, a))
        n2_trace.append(len(neighborhood(graph, v2)))

        if n2_trace[-1] >= size:
            raise RuntimeError(f"|N_{v2 + 1}| did not shrink ({size} -> {n2_trace[-1]}) after LC at {u + 1}")

        common = neighborhood(graph, v1) & neighborhood(graph, v2)
        for x in good_before:
            if x in common and not is_good(graph, x, v2):
                raise RuntimeError(f"Good vertex {x + 1} turned bad after LC at {u + 1}")

    if not is_standard(graph, v1, v2):
        raise RuntimeError(f"Pair ({v1 + 1}, {v2 + 1}) is not in standard form after standardization")

    beta = index_beta(graph, v1, v2)

    logger.debug(f"Standard form with pair ({v1 + 1}, {v2 + 1}), beta={beta}, {len(sequence)} LC steps")

    return StandardFormResult(
        graph=graph,
        pair=(v1, v2),
        lc_sequence=tuple(sequence),
        beta=beta,
        n2_trace=tuple(n2_trace),
    )


def lc_orbit(graph: Multigraph, max_size: int = EXHAUSTIVE_MAX_ORBIT):
    """Breadth-first walk of the LC orbit.

    Returns ``(order, parent, complete)`` where ``parent`` maps a graph key to
    ``(parent key, (vertex, weight))``; ``complete`` is False if the walk was
    cut at ``max_size`` graphs.
    """
    start = graph.key()
    parent = {start: None}
    graphs = {start: graph}
    order = [start]
    queue = collections.deque([graph])
    complete = True

    while queue:
        current = queue.popleft()
        for l in range(current.n):
            for a in range(1, current.d):
                nxt = lc_apply(current, l, a)
                k = nxt.key()
                if k in parent:
                    continue
                if len(order) >= max_size:
                    complete = False
                    queue.clear()
                    break
                parent[k] = (current.key(), (l, a))
                graphs[k] = nxt
                order.append(k)
                queue.append(nxt)
            if not complete:
                break

    return [graphs[k] for k in order], parent, complete


def _certificate(parent: dict, key: bytes) -> typing.List[typing.Tuple[int, int]]:
    steps = []
    while parent[key] is not None:
        key, step = parent[key]
        steps.append(step)
    return steps[::-1]


def _standardize_exhaustive(graph: Multigraph, max_orbit: int) -> StandardFormResult:
    if graph.n > EXHAUSTIVE_MAX_VERTICES:
        raise PreconditionError(f"Exhaustive search is limited to n <= {EXHAUSTIVE_MAX_VERTICES}, got {graph.n}")

    orbit, parent, complete = lc_orbit(graph, max_orbit)

    if not complete:
        logger.warning(f"LC orbit truncated at {max_orbit} graphs; the minimum index is not guaranteed")

    best = None
    for member in orbit:
        for v1 in range(member.n):
            for v2 in sorted(neighborhood(member, v1)):
                if not _is_standard(member, v1, v2):
                    continue
                beta = index_beta(member, v1, v2)
                if best is None or beta < best[0]:
                    best = (beta, member, (v1, v2))
        if best is not None and best[0] == 1:
            break

    if best is None:
        raise RuntimeError("No standard form in the explored LC orbit")

    beta, member, pair = best

    sequence = tuple(_certificate(parent, member.key()))

    logger.info(f"Exhaustive standard form over {len(orbit)} graphs: beta={beta}")

    return StandardFormResult(
        graph=member,
        pair=pair,
        lc_sequence=sequence,
        beta=beta,
        n2_trace=(len(neighborhood(member, pair[1])),),
        exhaustive=True,
        orbit_complete=complete,
    )


def minimum_beta(graph: Multigraph, max_orbit: int = EXHAUSTIVE_MAX_ORBIT) -> int:
    return standardize(graph, exhaustive=True, max_orbit=max_orbit).beta


def classify(graph: Multigraph, v1: int, v2: int) -> GraphClass:
    """Sort a graph with connected pair (v1, v2) into the classes G0-G3.

    G0: N_1 ∩ N_2 is empty.
    G1: no common neighbour u has N_2 \\ {u} = N_u \\ {2}.
    G2: the only common neighbour u has N_2 \\ {u} = N_u \\ {2}.
    G3: at least two common neighbours, one of them u with N_2 \\ {u} = N_u \\ {2}
        and a weight a with Γ_2v + a Γ_2u Γ_uv = 0 for every v in N_u \\ {2}.
    """
    _check_adjacent(graph, v1, v2)

    n1, n2 = neighborhood(graph, v1), neighborhood(graph, v2)

    if len(n1 - n2) < 2:
        raise PreconditionError(f"Classification needs |N_{v1 + 1} \\ N_{v2 + 1}| >= 2")

    common = sorted(n1 & n2)

    if not common:
        return GraphClass("G0")

    twins = [u for u in common if (n2 - {u}) == (neighborhood(graph, u) - {v2})]

    if not twins:
        return GraphClass("G1")

    if len(common) == 1:
        return GraphClass("G2", witness=twins[0])

    d = graph.d
    for u in twins:
        others = sorted(neighborhood(graph, u) - {v2})
        for a in range(1, d):
            if all((graph.gamma[v2, v] + a * graph.gamma[v2, u] * graph.gamma[u, v]) % d == 0 for v in others):
                return GraphClass("G3", witness=u, weight=a)

    raise PreconditionError("Graph satisfies none of the classes G0-G3 for this pair")


__all__ = [
    "StandardFormResult",
    "GraphClass",
    "is_good",
    "is_standard",
    "index_beta",
    "standardize",
    "lc_orbit",
    "lc_replay",
    "minimum_beta",
    "classify",
]
