"""Tournaments, terminal-aware acyclicity checks, and solution verification.

Vertices are 0..n-1. A tournament carries a stable external label per vertex
so that vertex deletions (which compact the range) stay traceable.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Iterator, Literal, Optional, Sequence

import numpy as np

Arc = tuple[int, int]

__all__ = [
    "Arc",
    "Digraph",
    "Instance",
    "InternalInvariantError",
    "InvalidArcError",
    "OrderedPartition",
    "Tournament",
    "has_s_triangle",
    "is_s_acyclic",
    "reverse_arcs",
    "s_backward_arcs",
    "s_topological_ordering",
    "s_triangles_through_arc",
    "strongly_connected_components",
    "verify_solution",
    "vertex_in_any_triangle",
]


class InvalidArcError(ValueError):
    """An arc refers to an ordered pair absent from the graph at hand."""


class InternalInvariantError(RuntimeError):
    """A structural guarantee the algorithms depend on failed to hold."""


def _freeze(matrix: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(matrix, dtype=bool)
    out.setflags(write=False)
    return out


class Tournament:
    """A complete orientation of K_n.

    ``adj[u, v]`` is True exactly when the arc (u, v) is present; for every
    pair u != v exactly one direction is present.
    """

    __slots__ = ("n", "adj", "labels")

    def __init__(self, adj: np.ndarray, labels: Optional[Sequence[int]] = None):
        adj = np.asarray(adj, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency matrix must be square")
        n = adj.shape[0]
        if bool(np.diagonal(adj).any()):
            raise ValueError("self-loops are not allowed")
        off_diagonal = ~np.eye(n, dtype=bool)
        if not np.array_equal(adj ^ adj.T, off_diagonal):
            raise ValueError("matrix is not a tournament orientation")
        self.n = n
        self.adj = _freeze(adj)
        self.labels = tuple(labels) if labels is not None else tuple(range(n))
        if len(self.labels) != n:
            raise ValueError("label count does not match vertex count")
        if len(set(self.labels)) != n:
            raise ValueError("labels must be distinct")

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[Arc]) -> "Tournament":
        adj = np.zeros((n, n), dtype=bool)
        for u, v in arcs:
            if not (0 <= u < n and 0 <= v < n) or u == v:
                raise ValueError(f"bad arc ({u}, {v})")
            if adj[u, v] or adj[v, u]:
                raise ValueError(f"pair {{{u}, {v}}} oriented twice")
            adj[u, v] = True
        if int(adj.sum()) != n * (n - 1) // 2:
            raise ValueError("not every pair is oriented")
        return cls(adj)

    def has_arc(self, u: int, v: int) -> bool:
        return bool(self.adj[u, v])

    def arcs(self) -> Iterator[Arc]:
        for u, v in np.argwhere(self.adj):
            yield (int(u), int(v))

    def arc_count(self) -> int:
        return self.n * (self.n - 1) // 2

    def out_degrees(self) -> np.ndarray:
        return self.adj.sum(axis=1)

    def index_of(self) -> dict[int, int]:
        """Map external label -> current vertex index."""
        return {lab: i for i, lab in enumerate(self.labels)}

    def drop(self, vertices: Iterable[int]) -> "Tournament":
        """Delete vertices (by index); the copy is compacted, labels kept."""
        gone = set(vertices)
        keep = [v for v in range(self.n) if v not in gone]
        sub = self.adj[np.ix_(keep, keep)]
        return Tournament(sub, [self.labels[v] for v in keep])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Tournament):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.adj, other.adj)

    def __hash__(self) -> int:
        return hash((self.labels, self.adj.tobytes()))

    def __repr__(self) -> str:
        return f"Tournament(n={self.n})"


class Digraph:
    """Plain directed graph on 0..n-1, used for deletion-semantics checks."""

    __slots__ = ("n", "adj")

    def __init__(self, adj: np.ndarray):
        adj = np.asarray(adj, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError("adjacency matrix must be square")
        if adj.trace() != 0:
            raise ValueError("self-loops are not allowed")
        self.n = adj.shape[0]
        self.adj = _freeze(adj)

    @classmethod
    def minus(cls, t: Tournament, arcs: Iterable[Arc]) -> "Digraph":
        """The digraph obtained by deleting ``arcs`` from a tournament."""
        adj = np.array(t.adj)
        for u, v in arcs:
            if not adj[u, v]:
                raise InvalidArcError(f"arc ({u}, {v}) not present")
            adj[u, v] = False
        return cls(adj)


@dataclass(frozen=True)
class Instance:
    """A tournament, a terminal set, and a reversal budget."""

    tournament: Tournament
    terminals: frozenset[int]
    k: int

    def __post_init__(self) -> None:
        n = self.tournament.n
        if not all(0 <= s < n for s in self.terminals):
            raise ValueError("terminal out of range")

    @property
    def n(self) -> int:
        return self.tournament.n


@dataclass(frozen=True)
class OrderedPartition:
    """An ordered partition of the vertex set into parts."""

    parts: tuple[tuple[int, ...], ...]

    def flatten(self) -> tuple[int, ...]:
        return tuple(v for part in self.parts for v in part)


def reverse_arcs(t: Tournament, arcs: Iterable[Arc]) -> Tournament:
    """Reverse the given arcs; every arc must currently be present."""
    adj = np.array(t.adj)
    seen: set[Arc] = set()
    for u, v in arcs:
        a = (int(u), int(v))
        if a in seen:
            raise InvalidArcError(f"arc ({u}, {v}) listed twice")
        seen.add(a)
        if not (0 <= u < t.n and 0 <= v < t.n) or not t.adj[u, v]:
            raise InvalidArcError(f"arc ({u}, {v}) not present")
    for u, v in seen:
        adj[u, v] = False
        adj[v, u] = True
    return Tournament(adj, t.labels)


def _successor_lists(adj: np.ndarray) -> list[list[int]]:
    rows, cols = np.nonzero(adj)
    starts = np.searchsorted(rows, np.arange(adj.shape[0] + 1))
    return [cols[starts[i] : starts[i + 1]].tolist() for i in range(adj.shape[0])]


def strongly_connected_components(g: Tournament | Digraph) -> tuple[tuple[int, ...], ...]:
    """All SCCs, in a topological order of the condensation.

    Ties between incomparable components are broken by smallest contained
    vertex, which makes the output order deterministic. Each component is an
    ascending vertex tuple.
    """
    n = g.n
    succ = _successor_lists(g.adj)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comp_of = [-1] * n
    comps: list[list[int]] = []
    counter = 0

    for root in range(n):
        if index[root] != -1:
            continue
        work: list[tuple[int, int]] = [(root, 0)]
        while work:
            v, ptr = work[-1]
            if ptr == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            descended = False
            neighbors = succ[v]
            while ptr < len(neighbors):
                w = neighbors[ptr]
                ptr += 1
                if index[w] == -1:
                    work[-1] = (v, ptr)
                    work.append((w, 0))
                    descended = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if descended:
                continue
            if low[v] == index[v]:
                comp: list[int] = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp_of[w] = len(comps)
                    comp.append(w)
                    if w == v:
                        break
                comp.sort()
                comps.append(comp)
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])

    m = len(comps)
    out_edges: list[set[int]] = [set() for _ in range(m)]
    indegree = [0] * m
    for u in range(n):
        cu = comp_of[u]
        for v in succ[u]:
            cv = comp_of[v]
            if cu != cv and cv not in out_edges[cu]:
                out_edges[cu].add(cv)
                indegree[cv] += 1
    heap = [(comps[c][0], c) for c in range(m) if indegree[c] == 0]
    heapq.heapify(heap)
    order: list[tuple[int, ...]] = []
    while heap:
        _, c = heapq.heappop(heap)
        order.append(tuple(comps[c]))
        for d in out_edges[c]:
            indegree[d] -= 1
            if indegree[d] == 0:
                heapq.heappush(heap, (comps[d][0], d))
    if len(order) != m:
        raise InternalInvariantError("condensation was not acyclic")
    return tuple(order)


def is_s_acyclic(g: Tournament | Digraph, terminals: frozenset[int] | set[int]) -> bool:
    """True when no cycle passes through a terminal.

    A terminal lies on a cycle exactly when some nonempty path leads back to
    it, so boolean squaring of the reachability matrix answers every
    terminal at once and stays in numpy; that beats an SCC pass on the small
    dense graphs this sees by an order of magnitude.
    """
    if not terminals:
        return True
    reach = g.adj.astype(np.uint8)
    while True:
        grown = ((reach + reach @ reach) > 0).astype(np.uint8)
        if np.array_equal(grown, reach):
            break
        reach = grown
    closed = np.diagonal(reach)
    return not any(closed[v] for v in terminals)


def has_s_triangle(
    t: Tournament, terminals: frozenset[int] | set[int]
) -> Optional[tuple[int, int, int]]:
    """Some directed triangle through a terminal, or None.

    Returns (s, a, b) with arcs (s, a), (a, b), (b, s), where s is the
    smallest terminal on any triangle and (a, b) is lexicographically
    smallest for that s.
    """
    adj = t.adj
    for s in sorted(terminals):
        outs = np.flatnonzero(adj[s])
        ins = np.flatnonzero(adj[:, s])
        if outs.size == 0 or ins.size == 0:
            continue
        sub = adj[np.ix_(outs, ins)]
        hits = np.argwhere(sub)
        if hits.size:
            a, b = hits[0]
            return (s, int(outs[a]), int(ins[b]))
    return None


def vertex_in_any_triangle(t: Tournament, v: int) -> bool:
    """Whether v lies on any directed triangle (terminal or not)."""
    outs = np.flatnonzero(t.adj[v])
    ins = np.flatnonzero(t.adj[:, v])
    if outs.size == 0 or ins.size == 0:
        return False
    return bool(t.adj[np.ix_(outs, ins)].any())


def s_triangles_through_arc(
    t: Tournament, terminals: frozenset[int] | set[int], arc: Arc
) -> list[int]:
    """Vertices w completing arc (u, v) to a terminal triangle u->v->w->u."""
    u, v = arc
    if not (0 <= u < t.n and 0 <= v < t.n) or not t.adj[u, v]:
        raise InvalidArcError(f"arc ({u}, {v}) not present")
    completing = t.adj[v] & t.adj[:, u]
    if u not in terminals and v not in terminals:
        mask = np.zeros(t.n, dtype=bool)
        mask[sorted(terminals)] = True
        completing = completing & mask
    return [int(w) for w in np.flatnonzero(completing)]


def s_topological_ordering(
    t: Tournament, terminals: frozenset[int] | set[int]
) -> Optional[OrderedPartition]:
    """Ordered SCC partition with every terminal in a singleton part.

    Exists exactly when the tournament has no terminal triangle. Cross-part
    arcs all point forward because the condensation of a tournament is a
    transitive tournament.
    """
    comps = strongly_connected_components(t)
    for comp in comps:
        if len(comp) > 1 and any(v in terminals for v in comp):
            return None
    return OrderedPartition(parts=comps)


def s_backward_arcs(
    t: Tournament,
    terminals: frozenset[int] | set[int],
    order: Sequence[int],
) -> frozenset[Arc]:
    """Arcs pointing backward across or out of a terminal in ``order``.

    An arc (x, y) with y placed before x qualifies when x or y is a terminal
    or some terminal sits strictly between their positions.
    """
    perm = np.asarray(order, dtype=int)
    if perm.shape != (t.n,) or sorted(perm.tolist()) != list(range(t.n)):
        raise ValueError("order must be a permutation of the vertices")
    if t.n == 0:
        return frozenset()
    sub = t.adj[np.ix_(perm, perm)]
    is_term = np.zeros(t.n, dtype=bool)
    for s in terminals:
        is_term[s] = True
    term_perm = is_term[perm]
    cum = np.cumsum(term_perm)
    later, earlier = np.nonzero(np.tril(sub, k=-1))
    if later.size == 0:
        return frozenset()
    between = cum[later - 1] - cum[earlier] > 0
    keep = term_perm[later] | term_perm[earlier] | between
    return frozenset(
        (int(perm[i]), int(perm[j])) for i, j in zip(later[keep], earlier[keep])
    )


def verify_solution(
    instance: Instance,
    solution: Iterable[Arc],
    mode: Literal["reversal", "deletion"] = "reversal",
) -> bool:
    """Check a candidate solution against the instance and its budget.

    Arcs absent from the tournament raise InvalidArcError; a structurally
    valid candidate that exceeds k or leaves a terminal cycle returns False.
    """
    arcs = list(dict.fromkeys((int(u), int(v)) for u, v in solution))
    t = instance.tournament
    for u, v in arcs:
        if not (0 <= u < t.n and 0 <= v < t.n) or not t.adj[u, v]:
            raise InvalidArcError(f"arc ({u}, {v}) not present")
    if len(arcs) > instance.k:
        return False
    if mode == "reversal":
        return is_s_acyclic(reverse_arcs(t, arcs), instance.terminals)
    if mode == "deletion":
        return is_s_acyclic(Digraph.minus(t, arcs), instance.terminals)
    raise ValueError(f"unknown mode {mode!r}")
