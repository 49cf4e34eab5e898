"""Brute-force oracles and seeded instance generators.

The oracles are deliberately independent of the kernel and solver code: they
only use the acyclicity primitives, so they can arbitrate disagreements.
"""

from __future__ import annotations

import itertools
import math
import random
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graphs import (
    Arc,
    Digraph,
    Instance,
    Tournament,
    has_s_triangle,
    is_s_acyclic,
)

__all__ = [
    "GeneratorSpec",
    "OracleScaleError",
    "generate_planted",
    "generate_random",
    "oracle_min_deletion",
    "oracle_min_reversal_orderings",
]

# Above this many candidate subsets the deletion oracle switches to exact
# branch-and-bound; above this branching depth it refuses outright.
_ENUMERATION_BUDGET = 200_000
_BRANCHING_DEPTH_CAP = 12


class OracleScaleError(ValueError):
    """The requested brute-force computation is hopelessly large."""


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters for the seeded instance generators.

    ``k`` is the budget attached to a random instance; planted instances take
    their budget from ``planted_k`` instead.
    """

    n: int
    s_count: int
    seed: int
    planted_k: Optional[int] = None
    k: Optional[int] = None

    def __post_init__(self) -> None:
        if self.n < 0 or not (0 <= self.s_count <= self.n):
            raise ValueError("need 0 <= s_count <= n")


def _shortest_terminal_cycle(
    adj: np.ndarray, terminals: tuple[int, ...]
) -> Optional[list[Arc]]:
    """A shortest cycle through a terminal, as an arc list, or None.

    Ties are broken by the smallest terminal. Works on arbitrary digraphs,
    which matters because deletion leaves a non-tournament behind.
    """
    n = adj.shape[0]
    best: Optional[list[int]] = None
    for s in terminals:
        # BFS over successors; first path returning to s is a shortest cycle
        # through s.
        parent = np.full(n, -1, dtype=int)
        dist = np.full(n, -1, dtype=int)
        frontier = [s]
        dist[s] = 0
        closed = -1
        while frontier and closed < 0:
            nxt: list[int] = []
            for v in frontier:
                for w in np.flatnonzero(adj[v]):
                    w = int(w)
                    if w == s:
                        closed = v
                        break
                    if dist[w] < 0:
                        dist[w] = dist[v] + 1
                        parent[w] = v
                        nxt.append(w)
                if closed >= 0:
                    break
            frontier = nxt
        if closed < 0:
            continue
        path = [closed]
        while path[-1] != s:
            path.append(int(parent[path[-1]]))
        path.reverse()  # s ... closed
        if best is None or len(path) < len(best):
            best = path
    if best is None:
        return None
    return [(best[i], best[(i + 1) % len(best)]) for i in range(len(best))]


def _min_deletion_enumerate(
    t: Tournament, terminals: frozenset[int], k_max: int, tri_arcs: list[Arc]
) -> Optional[int]:
    arcs = [a for a in t.arcs()]
    for size in range(1, k_max + 1):
        # Only subsets hitting the fixed terminal triangle can be solutions;
        # partition them by the smallest triangle arc they contain.
        for j, anchor in enumerate(tri_arcs):
            rest = [a for a in arcs if a not in tri_arcs[: j + 1]]
            for combo in itertools.combinations(rest, size - 1):
                chosen = (anchor,) + combo
                if is_s_acyclic(Digraph.minus(t, chosen), terminals):
                    return size
    return None


def _min_deletion_branch(
    t: Tournament, terminals: frozenset[int], k_max: int
) -> Optional[int]:
    term_tuple = tuple(sorted(terminals))
    best: list[Optional[int]] = [None]

    def go(adj: np.ndarray, removed: int) -> None:
        if best[0] is not None and removed >= best[0]:
            return
        cycle = _shortest_terminal_cycle(adj, term_tuple)
        if cycle is None:
            best[0] = removed
            return
        if removed == k_max:
            return
        for u, v in cycle:
            adj[u, v] = False
            go(adj, removed + 1)
            adj[u, v] = True

    go(np.array(t.adj), 0)
    return best[0]


def oracle_min_deletion(
    t: Tournament, terminals: frozenset[int] | set[int], k_max: int
) -> Optional[int]:
    """Smallest arc set whose deletion kills all terminal cycles, if <= k_max.

    Exact. Enumerates subsets ascending by size (restricted to subsets that
    hit one fixed terminal triangle, which every solution must); when the
    subset count is too large it falls back to exact cycle branching, and
    past the branching guard it raises OracleScaleError.
    """
    terminals = frozenset(terminals)
    if is_s_acyclic(t, terminals):
        return 0 if k_max >= 0 else None
    if k_max <= 0:
        return None
    tri = has_s_triangle(t, terminals)
    if tri is None:
        raise AssertionError("terminal cycle without terminal triangle")
    s, a, b = tri
    tri_arcs = [(s, a), (a, b), (b, s)]
    m = t.arc_count()
    candidates = sum(
        math.comb(m, size) - math.comb(max(m - 3, 0), size)
        for size in range(1, k_max + 1)
    )
    if candidates <= _ENUMERATION_BUDGET:
        return _min_deletion_enumerate(t, frozenset(terminals), k_max, tri_arcs)
    if k_max <= _BRANCHING_DEPTH_CAP:
        return _min_deletion_branch(t, frozenset(terminals), k_max)
    raise OracleScaleError(
        f"{candidates} subsets and branching depth {k_max} both out of reach"
    )


def _backward_counts(
    adj: np.ndarray, is_term: np.ndarray, perms: np.ndarray
) -> np.ndarray:
    """Terminal-backward arc counts for a batch of orderings."""
    batch, n = perms.shape
    sub = adj[perms[:, :, None], perms[:, None, :]]
    term = is_term[perms]
    cum = np.cumsum(term, axis=1)
    prev = np.concatenate([np.zeros((batch, 1), cum.dtype), cum[:, :-1]], axis=1)
    between = (prev[:, :, None] - cum[:, None, :]) > 0
    qualifies = term[:, :, None] | term[:, None, :] | between
    lower = np.tril(np.ones((n, n), dtype=bool), k=-1)
    return (sub & lower[None, :, :] & qualifies).sum(axis=(1, 2))


def oracle_min_reversal_orderings(
    t: Tournament, terminals: frozenset[int] | set[int], n_cap: int = 9
) -> int:
    """Minimum terminal-backward arc count over all vertex orderings.

    Reversing the backward arcs of the best ordering is an optimal reversal
    solution, so this is the reversal optimum. Guarded at n <= n_cap.
    """
    if t.n > n_cap:
        raise OracleScaleError(f"n={t.n} exceeds the ordering oracle cap {n_cap}")
    if t.n <= 1:
        return 0
    is_term = np.zeros(t.n, dtype=bool)
    for s in terminals:
        is_term[s] = True
    best = t.arc_count() + 1
    chunk = 40320
    perm_iter = itertools.permutations(range(t.n))
    while True:
        block = list(itertools.islice(perm_iter, chunk))
        if not block:
            break
        counts = _backward_counts(t.adj, is_term, np.array(block, dtype=int))
        best = min(best, int(counts.min()))
        if best == 0:
            break
    return best


def generate_random(spec: GeneratorSpec) -> Instance:
    """A uniformly random tournament with the first s_count vertices terminal."""
    if spec.k is None:
        raise ValueError("random instances need an explicit budget k")
    rng = random.Random(spec.seed)
    n = spec.n
    adj = np.zeros((n, n), dtype=bool)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < 0.5:
                adj[u, v] = True
            else:
                adj[v, u] = True
    return Instance(Tournament(adj), frozenset(range(spec.s_count)), spec.k)


def generate_planted(spec: GeneratorSpec) -> tuple[Instance, frozenset[Arc]]:
    """A yes-instance built by flipping planted_k arcs of a terminal-acyclic base.

    The base tournament orients every pair that touches or spans a terminal
    forward along a random vertex order, so it has no terminal cycle. The
    returned arc set restores the base when reversed, hence the instance with
    k = planted_k is a yes-instance and the optimum is at most planted_k.
    """
    if spec.planted_k is None:
        raise ValueError("planted instances need planted_k")
    n = spec.n
    pairs = n * (n - 1) // 2
    if not (0 <= spec.planted_k <= pairs):
        raise ValueError("planted_k out of range")
    rng = random.Random(spec.seed)
    order = list(range(n))
    rng.shuffle(order)
    pos = [0] * n
    for i, v in enumerate(order):
        pos[v] = i
    terminals = frozenset(range(spec.s_count))
    term_positions = sorted(pos[s] for s in terminals)

    def spans_terminal(lo: int, hi: int) -> bool:
        return bisect_right(term_positions, hi - 1) > bisect_left(term_positions, lo + 1)

    adj = np.zeros((n, n), dtype=bool)
    for u in range(n):
        for v in range(u + 1, n):
            a, b = (u, v) if pos[u] < pos[v] else (v, u)
            forced = a in terminals or b in terminals or spans_terminal(pos[a], pos[b])
            if forced or rng.random() < 0.5:
                adj[a, b] = True
            else:
                adj[b, a] = True

    flipped = rng.sample(list(itertools.combinations(range(n), 2)), spec.planted_k)
    planted: set[Arc] = set()
    for u, v in flipped:
        if adj[u, v]:
            adj[u, v] = False
            adj[v, u] = True
            planted.add((v, u))
        else:
            adj[v, u] = False
            adj[u, v] = True
            planted.add((u, v))
    instance = Instance(Tournament(adj), terminals, spec.planted_k)
    return instance, frozenset(planted)
