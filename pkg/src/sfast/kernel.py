"""Kernelization for subset feedback arc set in tournaments.

Nine reduction rules drive every instance down to O(k^2) vertices. The driver
applies the first applicable rule in a fixed order and restarts after every
mutation, so each rule may assume all earlier ones are exhausted. Applied
rules leave trace records (in original vertex labels) that `lift_solution`
walks backward to translate kernel solutions into solutions of the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .graphs import (
    Arc,
    Digraph,
    Instance,
    InternalInvariantError,
    Tournament,
    has_s_triangle,
    is_s_acyclic,
    reverse_arcs,
    s_backward_arcs,
    verify_solution,
    vertex_in_any_triangle,
)

__all__ = [
    "BipartiteConflictGraph",
    "ClassDecomposition",
    "ConflictPacking",
    "KernelResult",
    "RuleOutcome",
    "STATUS_APPLIED",
    "STATUS_NOT_APPLICABLE",
    "STATUS_TRIVIAL_NO",
    "STATUS_TRIVIAL_YES",
    "arc_swap_normalize",
    "build_conflict_bipartite",
    "class_decomposition",
    "conflict_packing",
    "equivalence_classes",
    "kernelize",
    "lift_solution",
    "max_matching_min_vertex_cover",
    "minimalize_solution",
    "packing_ordering",
    "rr1_sanity",
    "rr2_triangle_free_terminal",
    "rr3_many_triangles",
    "rr4_bounded_terminal",
    "rr5_safe_partition",
    "rr6_many_types",
    "rr7_wrong_arcs",
    "rr8_irrelevant_vertex",
    "rr9_vertex_bound",
    "vertex_bound",
]

STATUS_APPLIED = "applied"
STATUS_NOT_APPLICABLE = "not-applicable"
STATUS_TRIVIAL_YES = "trivial-yes"
STATUS_TRIVIAL_NO = "trivial-no"


def decomposition_class_size(k: int) -> int:
    """Classes at least this large support the degree decomposition."""
    return 6 * k + 6


def deletion_class_size(k: int) -> int:
    """Classes at least this large admit an irrelevant-vertex deletion."""
    return 6 * k + 7


def vertex_bound(k: int) -> int:
    """Vertex count above which the instance cannot be a yes-instance."""
    return 30 * k * k + 40 * k + 7


@dataclass(frozen=True)
class RuleOutcome:
    """What one rule did: applied with a successor instance, or a verdict."""

    rule: str
    status: str
    next: Optional[Instance] = None
    note: str = ""
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ConflictPacking:
    """A maximal arc-disjoint set of terminal triangles."""

    triangles: tuple[tuple[int, int, int], ...]
    packed_arcs: frozenset[Arc]
    covered: frozenset[int]


@dataclass(frozen=True)
class BipartiteConflictGraph:
    """Packed arcs vs uncovered terminals; edges are shared triangles.

    ``edges[i]`` lists indices into ``right`` adjacent to ``left[i]``.
    """

    left: tuple[Arc, ...]
    right: tuple[int, ...]
    edges: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class ClassDecomposition:
    """Degree-based split of one equivalence class and its surroundings.

    z is the class; s1/s2 the terminals beating/beaten by it. z_prime holds
    the class members with both in- and out-degree >= k+1 inside the class,
    z_minus/z_plus the low in-/out-degree rest. r_* classify the non-terminal
    vertices outside the class by their degrees into z_prime; the tilde
    variants additionally touch z_prime. z_relevant are the z_prime vertices
    adjacent to low-degree material in the wrong direction; z_irrelevant the
    remainder, candidates for deletion.
    """

    z: frozenset[int]
    s1: frozenset[int]
    s2: frozenset[int]
    z_prime: frozenset[int]
    z_minus: frozenset[int]
    z_plus: frozenset[int]
    r_less: frozenset[int]
    r_greater: frozenset[int]
    r_less_tilde: frozenset[int]
    r_greater_tilde: frozenset[int]
    z_relevant: frozenset[int]
    z_irrelevant: frozenset[int]


@dataclass(frozen=True)
class KernelResult:
    status: str
    kernel: Optional[Instance]
    trace: tuple[RuleOutcome, ...]
    reversal_prefix: frozenset[Arc]


def _stats(instance: Instance) -> list[int]:
    return [instance.n, len(instance.terminals), instance.k]


def _arc_labels(t: Tournament, arcs: Iterable[Arc]) -> list[list[int]]:
    return sorted([t.labels[u], t.labels[v]] for u, v in arcs)


def _delete_vertex(instance: Instance, v: int) -> Instance:
    t2 = instance.tournament.drop([v])
    terms = frozenset(s - (s > v) for s in instance.terminals if s != v)
    return Instance(t2, terms, instance.k)


def _term_mask(instance: Instance) -> np.ndarray:
    mask = np.zeros(instance.n, dtype=bool)
    for s in instance.terminals:
        mask[s] = True
    return mask


def _outcome(
    rule: str,
    status: str,
    instance: Instance,
    next_instance: Optional[Instance] = None,
    note: str = "",
    **detail: object,
) -> RuleOutcome:
    data: dict = {"pre": _stats(instance)}
    if next_instance is not None:
        data["post"] = _stats(next_instance)
    data.update(detail)
    return RuleOutcome(rule=rule, status=status, next=next_instance, note=note, detail=data)


# -- Rules 1 to 4 -----------------------------------------------------------


def rr1_sanity(instance: Instance) -> RuleOutcome:
    """Decide exhausted budgets: k < 0 is no, k = 0 is a bare acyclicity test."""
    if instance.k > 0:
        return _outcome("rr1", STATUS_NOT_APPLICABLE, instance)
    if instance.k < 0:
        return _outcome("rr1", STATUS_TRIVIAL_NO, instance, note="negative budget")
    tri = has_s_triangle(instance.tournament, instance.terminals)
    if tri is None:
        return _outcome("rr1", STATUS_TRIVIAL_YES, instance, note="terminal-acyclic at k=0")
    return _outcome(
        "rr1",
        STATUS_TRIVIAL_NO,
        instance,
        note="terminal triangle with zero budget",
        triangle=[instance.tournament.labels[v] for v in tri],
    )


def rr2_triangle_free_terminal(instance: Instance) -> RuleOutcome:
    """Delete the smallest terminal lying on no triangle at all."""
    t = instance.tournament
    for s in sorted(instance.terminals):
        if not vertex_in_any_triangle(t, s):
            nxt = _delete_vertex(instance, s)
            return _outcome(
                "rr2",
                STATUS_APPLIED,
                instance,
                nxt,
                note="terminal on no triangle",
                deleted=[t.labels[s]],
            )
    return _outcome("rr2", STATUS_NOT_APPLICABLE, instance)


def rr3_many_triangles(instance: Instance) -> RuleOutcome:
    """Reverse an arc on more than k terminal triangles; it is forced."""
    t, k = instance.tournament, instance.k
    n = t.n
    if n < 3:
        return _outcome("rr3", STATUS_NOT_APPLICABLE, instance)
    ai = t.adj.astype(np.int64)
    term = _term_mask(instance)
    # completions[v, u] = number of w with v -> w -> u
    completions_all = ai @ ai
    completions_term = (ai * term[None, :]) @ ai
    endpoint_term = term[:, None] | term[None, :]
    counts = np.where(endpoint_term, completions_all.T, completions_term.T)
    eligible = t.adj & (counts >= k + 1)
    hits = np.argwhere(eligible)
    if hits.size == 0:
        return _outcome("rr3", STATUS_NOT_APPLICABLE, instance)
    u, v = (int(x) for x in hits[0])
    nxt = Instance(reverse_arcs(t, [(u, v)]), instance.terminals, k - 1)
    return _outcome(
        "rr3",
        STATUS_APPLIED,
        instance,
        nxt,
        note="arc on more than k terminal triangles",
        reversed=_arc_labels(t, [(u, v)]),
    )


def rr4_bounded_terminal(instance: Instance) -> RuleOutcome:
    """With rules 1-3 exhausted, (k+1)^2 terminals rule out a solution."""
    if len(instance.terminals) >= (instance.k + 1) ** 2:
        return _outcome(
            "rr4", STATUS_TRIVIAL_NO, instance, note="too many terminals survive rules 1-3"
        )
    return _outcome("rr4", STATUS_NOT_APPLICABLE, instance)


# -- Rule 5: safe partition -------------------------------------------------


def conflict_packing(t: Tournament, terminals: frozenset[int] | set[int]) -> ConflictPacking:
    """Greedy maximal arc-disjoint terminal triangles, smallest-first.

    Triangles are taken in ascending (a, b, c) order where a is the smallest
    vertex of the triangle and a -> b -> c -> a. Greedy over shrinking arc
    availability, so the result is deterministic and maximal.
    """
    avail = np.array(t.adj)
    term = np.zeros(t.n, dtype=bool)
    for s in terminals:
        term[s] = True
    triangles: list[tuple[int, int, int]] = []
    a = 0
    b_from = 0
    while a < t.n:
        packed_here = False
        for b in range(max(a + 1, b_from), t.n):
            if not avail[a, b]:
                continue
            cands = avail[b] & avail[:, a]
            cands[: a + 1] = False
            if not (term[a] or term[b]):
                cands = cands & term
            hits = np.flatnonzero(cands)
            if hits.size == 0:
                continue
            c = int(hits[0])
            triangles.append((a, b, c))
            avail[a, b] = avail[b, c] = avail[c, a] = False
            b_from = b + 1
            packed_here = True
            break
        if not packed_here:
            a += 1
            b_from = 0
    packed_arcs = frozenset(
        arc for (x, y, z) in triangles for arc in ((x, y), (y, z), (z, x))
    )
    covered = frozenset(v for tri in triangles for v in tri)
    return ConflictPacking(tuple(triangles), packed_arcs, covered)


def packing_ordering(
    t: Tournament,
    terminals: frozenset[int] | set[int],
    packing: ConflictPacking,
) -> tuple[int, ...]:
    """Vertex order from a maximal packing: uncovered terminals in their
    forced order, everything else slotted by its in-degree among them.

    Maximality forces (a) the uncovered terminals to induce a transitive
    subtournament, and (b) every other vertex's in-neighbourhood among them
    to be a prefix of that order; violations raise InternalInvariantError.
    All backward arcs of the result relative to the uncovered terminals are
    packing arcs, which is asserted.
    """
    s1 = sorted(s for s in terminals if s not in packing.covered)
    keep = [v for v in range(t.n) if v not in packing.covered]
    residual = t.drop(packing.covered)
    residual_terms = {i for i, v in enumerate(keep) if v in terminals}
    if has_s_triangle(residual, residual_terms) is not None:
        raise InternalInvariantError("packing is not maximal: residual terminal triangle")

    indeg = {s: sum(1 for r in s1 if t.adj[r, s]) for s in s1}
    if sorted(indeg.values()) != list(range(len(s1))):
        raise InternalInvariantError("uncovered terminals do not order transitively")
    order_s1 = sorted(s1, key=lambda s: indeg[s])
    prefix_sets = [set()]
    for s in order_s1:
        prefix_sets.append(prefix_sets[-1] | {s})

    bags: list[list[int]] = [[] for _ in range(len(s1) + 1)]
    s1_set = set(s1)
    for v in range(t.n):
        if v in s1_set:
            continue
        in_nbrs = {s for s in s1 if t.adj[s, v]}
        slot = len(in_nbrs)
        if in_nbrs != prefix_sets[slot]:
            raise InternalInvariantError("vertex has no unambiguous slot")
        bags[slot].append(v)

    sigma: list[int] = []
    for i, s in enumerate(order_s1):
        sigma.extend(bags[i])
        sigma.append(s)
    sigma.extend(bags[len(s1)])

    stray = s_backward_arcs(t, s1_set, sigma) - packing.packed_arcs
    if stray:
        raise InternalInvariantError(f"unpacked backward arcs {sorted(stray)}")
    return tuple(sigma)


def build_conflict_bipartite(
    t: Tournament,
    terminals: frozenset[int] | set[int],
    packing: ConflictPacking,
) -> BipartiteConflictGraph:
    """Packed arcs against uncovered terminals, joined when they close a
    triangle. Maximality plus exhausted rules 1-2 leave no isolated terminal.
    """
    left = tuple(sorted(packing.packed_arcs))
    right = tuple(sorted(s for s in terminals if s not in packing.covered))
    edges = []
    for u, v in left:
        edges.append(
            tuple(j for j, y in enumerate(right) if t.adj[v, y] and t.adj[y, u])
        )
    seen = set(j for js in edges for j in js)
    if len(seen) != len(right):
        raise InternalInvariantError("isolated uncovered terminal in conflict graph")
    return BipartiteConflictGraph(left, right, tuple(edges))


def max_matching_min_vertex_cover(
    graph: BipartiteConflictGraph,
) -> tuple[tuple[tuple[int, int], ...], tuple[Arc, ...], tuple[int, ...]]:
    """Maximum matching and a matching-sized vertex cover (Koenig).

    Returns (matching pairs as (left index, right index), covered arcs,
    covered terminals). Deterministic: augmenting paths scan in index order.
    """
    nl, nr = len(graph.left), len(graph.right)
    match_l = [-1] * nl
    match_r = [-1] * nr

    def augment(i: int, seen: list[bool]) -> bool:
        for j in graph.edges[i]:
            if seen[j]:
                continue
            seen[j] = True
            if match_r[j] == -1 or augment(match_r[j], seen):
                match_l[i] = j
                match_r[j] = i
                return True
        return False

    for i in range(nl):
        augment(i, [False] * nr)

    reach_l = [match_l[i] == -1 for i in range(nl)]
    reach_r = [False] * nr
    queue = [i for i in range(nl) if reach_l[i]]
    while queue:
        i = queue.pop()
        for j in graph.edges[i]:
            if match_l[i] == j or reach_r[j]:
                continue
            reach_r[j] = True
            i2 = match_r[j]
            if i2 != -1 and not reach_l[i2]:
                reach_l[i2] = True
                queue.append(i2)

    matching = tuple((i, match_l[i]) for i in range(nl) if match_l[i] != -1)
    cover_arcs = tuple(graph.left[i] for i in range(nl) if not reach_l[i])
    cover_terms = tuple(graph.right[j] for j in range(nr) if reach_r[j])
    if len(cover_arcs) + len(cover_terms) != len(matching):
        raise InternalInvariantError("cover size differs from matching size")
    return matching, cover_arcs, cover_terms


def rr5_safe_partition(instance: Instance) -> RuleOutcome:
    """With more than 4k terminals, locate a batch of forced reversals.

    A maximal triangle packing orders the graph around the uncovered
    terminals; unmatched ones become singleton parts, and every backward arc
    crossing a part boundary belongs to some minimum solution. Oversized
    packings, matchings, or batches certify a no-instance.
    """
    t, terminals, k = instance.tournament, instance.terminals, instance.k
    if len(terminals) <= 4 * k:
        return _outcome("rr5", STATUS_NOT_APPLICABLE, instance, note="few terminals")
    packing = conflict_packing(t, terminals)
    if len(packing.triangles) > k:
        return _outcome(
            "rr5",
            STATUS_TRIVIAL_NO,
            instance,
            note="arc-disjoint terminal triangles exceed budget",
            packing=len(packing.triangles),
        )
    sigma = packing_ordering(t, terminals, packing)
    graph = build_conflict_bipartite(t, terminals, packing)
    matching, cover_arcs, cover_terms = max_matching_min_vertex_cover(graph)
    if len(matching) >= k + 1:
        return _outcome(
            "rr5",
            STATUS_TRIVIAL_NO,
            instance,
            note="conflict matching exceeds budget",
            matching=len(matching),
        )
    singles = sorted(set(graph.right) - set(cover_terms))
    if not singles:
        raise InternalInvariantError("no singleton terminals despite |S| > 4k")

    single_set = set(singles)
    part = np.zeros(t.n, dtype=int)
    current = 0
    for pos, v in enumerate(sigma):
        if v in single_set:
            current += 1
            part[pos] = current
            current += 1
        else:
            part[pos] = current
    sub = t.adj[np.ix_(sigma, sigma)]
    later, earlier = np.nonzero(np.tril(sub, k=-1))
    crossing = part[later] != part[earlier]
    batch = frozenset(
        (int(sigma[i]), int(sigma[j]))
        for i, j in zip(later[crossing], earlier[crossing])
    )
    if not batch:
        raise InternalInvariantError("no boundary-crossing backward arcs")
    if batch - packing.packed_arcs:
        raise InternalInvariantError("crossing arc outside the packing")
    if batch - s_backward_arcs(t, terminals, sigma):
        raise InternalInvariantError("crossing arc is not terminal-backward")
    if len(batch) > k:
        return _outcome(
            "rr5",
            STATUS_TRIVIAL_NO,
            instance,
            note="forced reversal batch exceeds budget",
            batch=len(batch),
        )
    nxt = Instance(reverse_arcs(t, batch), terminals, k - len(batch))
    return _outcome(
        "rr5",
        STATUS_APPLIED,
        instance,
        nxt,
        note="reversed all safe-partition boundary arcs",
        reversed=_arc_labels(t, batch),
    )


# -- Rules 6 to 8: equivalence classes --------------------------------------


def equivalence_classes(
    t: Tournament, terminals: frozenset[int] | set[int]
) -> dict[frozenset[int], tuple[int, ...]]:
    """Non-terminal vertices grouped by their terminal in-neighbourhood."""
    term_sorted = sorted(terminals)
    classes: dict[frozenset[int], list[int]] = {}
    for v in range(t.n):
        if v in terminals:
            continue
        key = frozenset(s for s in term_sorted if t.adj[s, v])
        classes.setdefault(key, []).append(v)
    return {key: tuple(sorted(vs)) for key, vs in classes.items()}


def rr6_many_types(instance: Instance) -> RuleOutcome:
    """More than 5k+1 distinct classes certify a no-instance."""
    classes = equivalence_classes(instance.tournament, instance.terminals)
    if len(classes) > 5 * instance.k + 1:
        return _outcome(
            "rr6",
            STATUS_TRIVIAL_NO,
            instance,
            note="too many terminal in-neighbourhood classes",
            classes=len(classes),
        )
    return _outcome("rr6", STATUS_NOT_APPLICABLE, instance)


def class_decomposition(instance: Instance, members: Sequence[int]) -> ClassDecomposition:
    """Degree decomposition of one class; see ClassDecomposition.

    Requires a class of size at least 6k+6 with rules 1-3 exhausted; under
    those preconditions the mixed in/out categories outside the class are
    provably empty and the low-degree fringe has at most 4k+2 vertices, both
    of which are asserted.
    """
    t, terminals, k = instance.tournament, instance.terminals, instance.k
    z_list = sorted(int(v) for v in members)
    if len(z_list) < decomposition_class_size(k):
        raise ValueError("class too small for the degree decomposition")
    z_arr = np.array(z_list)
    term_sorted = sorted(terminals)
    if term_sorted:
        type_cols = t.adj[np.ix_(term_sorted, z_arr)]
        if not (type_cols == type_cols[:, :1]).all():
            raise ValueError("members do not share a terminal in-neighbourhood")
        s1 = frozenset(s for i, s in enumerate(term_sorted) if type_cols[i, 0])
    else:
        s1 = frozenset()
    s2 = frozenset(terminals) - s1

    inside = t.adj[np.ix_(z_arr, z_arr)]
    indeg = inside.sum(axis=0)
    outdeg = inside.sum(axis=1)
    prime_mask = (indeg >= k + 1) & (outdeg >= k + 1)
    minus_mask = ~prime_mask & (indeg <= k)
    plus_mask = ~prime_mask & (outdeg <= k)
    if (minus_mask & plus_mask).any():
        raise InternalInvariantError("low in- and out-degree overlap in the class")
    fringe = int((~prime_mask).sum())
    if fringe > 4 * k + 2:
        raise InternalInvariantError("low-degree fringe exceeds 4k+2")

    z_prime = [z_list[i] for i in np.flatnonzero(prime_mask)]
    z_minus = [z_list[i] for i in np.flatnonzero(minus_mask)]
    z_plus = [z_list[i] for i in np.flatnonzero(plus_mask)]

    z_set = set(z_list)
    rest = [v for v in range(t.n) if v not in terminals and v not in z_set]
    zp_arr = np.array(z_prime, dtype=int)
    r_less: list[int] = []
    r_greater: list[int] = []
    r_less_tilde: list[int] = []
    r_greater_tilde: list[int] = []
    for v in rest:
        into = int(t.adj[zp_arr, v].sum()) if zp_arr.size else 0
        out = int(t.adj[v, zp_arr].sum()) if zp_arr.size else 0
        if into >= k + 1 and out >= k + 1:
            raise InternalInvariantError("outside vertex with high degree both ways")
        if into <= k and out <= k:
            raise InternalInvariantError("outside vertex with low degree both ways")
        if into <= k:
            r_less.append(v)
            if into >= 1:
                r_less_tilde.append(v)
        else:
            r_greater.append(v)
            if out >= 1:
                r_greater_tilde.append(v)

    relevant = np.zeros(len(z_prime), dtype=bool)
    sinks = sorted(set(z_minus) | set(r_less))
    sources = sorted(set(z_plus) | set(r_greater))
    if zp_arr.size and sinks:
        relevant |= t.adj[np.ix_(zp_arr, np.array(sinks))].any(axis=1)
    if zp_arr.size and sources:
        relevant |= t.adj[np.ix_(np.array(sources), zp_arr)].any(axis=0)
    z_relevant = [z_prime[i] for i in np.flatnonzero(relevant)]
    z_irrelevant = [z_prime[i] for i in np.flatnonzero(~relevant)]

    return ClassDecomposition(
        z=frozenset(z_list),
        s1=s1,
        s2=s2,
        z_prime=frozenset(z_prime),
        z_minus=frozenset(z_minus),
        z_plus=frozenset(z_plus),
        r_less=frozenset(r_less),
        r_greater=frozenset(r_greater),
        r_less_tilde=frozenset(r_less_tilde),
        r_greater_tilde=frozenset(r_greater_tilde),
        z_relevant=frozenset(z_relevant),
        z_irrelevant=frozenset(z_irrelevant),
    )


def rr7_wrong_arcs(instance: Instance, dec: ClassDecomposition) -> RuleOutcome:
    """Too many outside vertices with wrong-direction arcs into the core."""
    k = instance.k
    if len(dec.r_less_tilde) > k or len(dec.r_greater_tilde) > k:
        return _outcome(
            "rr7",
            STATUS_TRIVIAL_NO,
            instance,
            note="wrong-direction fringe exceeds budget",
            r_less_tilde=len(dec.r_less_tilde),
            r_greater_tilde=len(dec.r_greater_tilde),
        )
    return _outcome("rr7", STATUS_NOT_APPLICABLE, instance)


def _find_swap(
    instance: Instance, dec: ClassDecomposition
) -> Optional[tuple[Arc, Arc, int]]:
    """First normalization swap, or None: ((q, z), (z, p), z) with q, p in the
    relevant core and z a low-degree pivot whose core arcs point the wrong way.
    """
    t, k = instance.tournament, instance.k

    sinks = sorted(dec.z_minus | dec.r_less)
    sources = sorted(dec.z_plus | dec.r_greater)
    zp = sorted(dec.z_prime)

    if zp and sinks:
        side1 = [z for z in zp if any(t.adj[z, v] for v in sinks)]
        anchors = side1[: k + 1]
        far = set(side1[k + 1 :])
        if far:
            for v in sinks:
                ins = sorted(u for u in far if t.adj[u, v])
                if not ins:
                    continue
                u = ins[0]
                outs = [w for w in anchors if t.adj[v, w]]
                if not outs:
                    raise InternalInvariantError("pivot dominates every anchor")
                return ((u, v), (v, outs[0]), v)

    if zp and sources:
        side2 = [z for z in zp if any(t.adj[v, z] for v in sources)]
        anchors = side2[: k + 1]
        far = set(side2[k + 1 :])
        if far:
            for v in sources:
                outs = sorted(u for u in far if t.adj[v, u])
                if not outs:
                    continue
                u = outs[0]
                ins = [w for w in anchors if t.adj[w, v]]
                if not ins:
                    raise InternalInvariantError("pivot dominated by every anchor")
                return ((ins[0], v), (v, u), v)

    return None


def arc_swap_normalize(
    instance: Instance, dec: ClassDecomposition
) -> tuple[Instance, ClassDecomposition, tuple[RuleOutcome, ...]]:
    """Shrink the relevant core to at most 2k+2 vertices by arc swaps.

    Each swap reverses one incoming and one outgoing arc of a low-degree
    pivot, rerouting it from a far core vertex to one of the k+1 smallest
    (the anchors). The pivot keeps its degrees, core vertices only lose
    degrees, so the decomposition can be recomputed live and the loop
    provably terminates; a generous cap guards that argument.
    """
    k = instance.k
    members = sorted(dec.z)
    if len(members) < deletion_class_size(k):
        raise ValueError("normalization expects a deletable-size class")
    records: list[RuleOutcome] = []
    cap = 4 * (instance.n + 2) ** 3 + 64
    for _ in range(cap):
        swap = _find_swap(instance, dec)
        if swap is None:
            break
        arc_in, arc_out, pivot = swap
        t = instance.tournament
        nxt = Instance(reverse_arcs(t, [arc_in, arc_out]), instance.terminals, k)
        records.append(
            _outcome(
                "arc-swap",
                STATUS_APPLIED,
                instance,
                nxt,
                note="rerouted a pivot to an anchor",
                reversed=_arc_labels(t, [arc_in, arc_out]),
                pivot=t.labels[pivot],
            )
        )
        instance = nxt
        dec = class_decomposition(instance, members)
    else:
        raise InternalInvariantError("swap loop exceeded its certified bound")
    if len(dec.z_relevant) > 2 * k + 2:
        raise InternalInvariantError("relevant core still exceeds 2k+2 after swaps")
    return instance, dec, tuple(records)


def rr8_irrelevant_vertex(instance: Instance, dec: ClassDecomposition) -> RuleOutcome:
    """Delete the smallest vertex of the irrelevant core of a large class."""
    k = instance.k
    if len(dec.z) < deletion_class_size(k):
        return _outcome("rr8", STATUS_NOT_APPLICABLE, instance, note="class within bound")
    if not dec.z_irrelevant:
        raise InternalInvariantError("large class with empty irrelevant core")
    v = min(dec.z_irrelevant)
    nxt = _delete_vertex(instance, v)
    return _outcome(
        "rr8",
        STATUS_APPLIED,
        instance,
        nxt,
        note="deleted an irrelevant core vertex",
        deleted=[instance.tournament.labels[v]],
    )


def rr9_vertex_bound(instance: Instance) -> RuleOutcome:
    """Final size guard: more than 30k^2+40k+7 vertices is a no-instance."""
    if instance.n > vertex_bound(instance.k):
        return _outcome(
            "rr9", STATUS_TRIVIAL_NO, instance, note="vertex count above the kernel bound"
        )
    return _outcome("rr9", STATUS_NOT_APPLICABLE, instance)


# -- Driver ------------------------------------------------------------------


def _reversal_prefix(trace: Iterable[RuleOutcome]) -> frozenset[Arc]:
    acc: set[Arc] = set()
    for rec in trace:
        if rec.rule not in ("rr3", "rr5") or rec.status != STATUS_APPLIED:
            continue
        for u, v in rec.detail["reversed"]:
            if (v, u) in acc:
                acc.remove((v, u))
            else:
                acc.add((u, v))
    return frozenset(acc)


def kernelize(instance: Instance) -> KernelResult:
    """Apply the reduction rules to exhaustion.

    Returns a reduced kernel, or a trivial verdict when some rule decides the
    instance outright. The trace holds one record per applied rule (plus the
    deciding rule), in original labels, and is what `lift_solution` consumes.
    """
    trace: list[RuleOutcome] = []
    cur = instance

    def done(status: str, rec: RuleOutcome, kernel: Optional[Instance]) -> KernelResult:
        trace.append(rec)
        return KernelResult(status, kernel, tuple(trace), _reversal_prefix(trace))

    cap = instance.n + max(instance.k, 0) + 8
    for _ in range(cap):
        out = rr1_sanity(cur)
        if out.status in (STATUS_TRIVIAL_YES, STATUS_TRIVIAL_NO):
            return done(out.status, out, None)

        advanced = False
        for rule in (rr2_triangle_free_terminal, rr3_many_triangles):
            out = rule(cur)
            if out.status == STATUS_APPLIED:
                trace.append(out)
                cur = out.next
                advanced = True
                break
        if advanced:
            continue

        out = rr4_bounded_terminal(cur)
        if out.status == STATUS_TRIVIAL_NO:
            return done(out.status, out, None)

        out = rr5_safe_partition(cur)
        if out.status == STATUS_TRIVIAL_NO:
            return done(out.status, out, None)
        if out.status == STATUS_APPLIED:
            trace.append(out)
            cur = out.next
            continue

        out = rr6_many_types(cur)
        if out.status == STATUS_TRIVIAL_NO:
            return done(out.status, out, None)

        classes = equivalence_classes(cur.tournament, cur.terminals)
        big = sorted(
            (vs for vs in classes.values() if len(vs) >= decomposition_class_size(cur.k)),
            key=min,
        )
        decided = None
        for members in big:
            dec = class_decomposition(cur, members)
            out = rr7_wrong_arcs(cur, dec)
            if out.status == STATUS_TRIVIAL_NO:
                decided = out
                break
        if decided is not None:
            return done(decided.status, decided, None)

        deletable = [vs for vs in big if len(vs) >= deletion_class_size(cur.k)]
        if deletable:
            members = deletable[0]
            dec = class_decomposition(cur, members)
            cur, dec, swaps = arc_swap_normalize(cur, dec)
            trace.extend(swaps)
            out = rr8_irrelevant_vertex(cur, dec)
            if out.status != STATUS_APPLIED:
                raise InternalInvariantError("deletable class but rule 8 balked")
            trace.append(out)
            cur = out.next
            continue

        out = rr9_vertex_bound(cur)
        if out.status == STATUS_TRIVIAL_NO:
            return done(out.status, out, None)

        return KernelResult("reduced", cur, tuple(trace), _reversal_prefix(trace))

    raise InternalInvariantError("kernelization failed to settle within its cap")


# -- Solution lifting --------------------------------------------------------


def _to_indices(instance: Instance, labeled: Iterable[tuple[int, int]]) -> list[Arc]:
    index = instance.tournament.index_of()
    out = []
    for lu, lv in labeled:
        if lu not in index or lv not in index:
            raise InternalInvariantError(f"lifted arc ({lu}, {lv}) names a deleted vertex")
        out.append((index[lu], index[lv]))
    return out


def _check(instance: Instance, labeled: set[tuple[int, int]], context: str) -> None:
    arcs = _to_indices(instance, labeled)
    if not verify_solution(instance, arcs, mode="reversal"):
        raise InternalInvariantError(f"lift through {context} broke the solution")


def minimalize_solution(
    instance: Instance, solution_labels: Iterable[tuple[int, int]]
) -> set[tuple[int, int]]:
    """Greedy prune to an inclusion-minimal solution (label arcs).

    Works under deletion semantics; minimal deletion and reversal solutions
    coincide, so the result is again a reversal solution.
    """
    t, terminals = instance.tournament, instance.terminals
    index = instance.tournament.index_of()
    current = {tuple(a) for a in solution_labels}
    for arc in sorted(current):
        trial = current - {arc}
        arcs = [(index[u], index[v]) for u, v in trial]
        if is_s_acyclic(Digraph.minus(t, arcs), terminals):
            current = trial
    return current


def lift_solution(
    original: Instance,
    trace: Sequence[RuleOutcome],
    kernel_solution_labels: Iterable[tuple[int, int]],
) -> frozenset[tuple[int, int]]:
    """Walk a kernelization trace backward, translating a kernel solution
    into a solution of the original instance (all arcs in original labels).

    Every intermediate step is re-verified; a failure means the trace or the
    rule algebra is broken and raises InternalInvariantError.
    """
    steps = [rec for rec in trace if rec.status == STATUS_APPLIED]
    chain = [original] + [rec.next for rec in steps]
    raw = {(int(u), int(v)) for u, v in kernel_solution_labels}
    _check(chain[-1], raw, "kernel solution")

    current = raw
    for parent, rec, child in zip(chain[-2::-1], steps[::-1], chain[:0:-1]):
        if rec.rule == "rr2":
            current = minimalize_solution(child, current)
        elif rec.rule == "rr8":
            pass
        elif rec.rule in ("rr3", "rr5"):
            pair = {tuple(a) for a in rec.detail["reversed"]}
            cancelled = {arc for arc in pair if (arc[1], arc[0]) in current}
            current = (
                current - {(v, u) for u, v in cancelled} | (pair - cancelled)
            )
        elif rec.rule == "arc-swap":
            current = minimalize_solution(child, current)
            pair = {tuple(a) for a in rec.detail["reversed"]}
            cancelled = {arc for arc in pair if (arc[1], arc[0]) in current}
            if len(cancelled) == 2:
                current = current - {(v, u) for u, v in cancelled}
            elif len(cancelled) == 1:
                gone = next(iter(cancelled))
                (other,) = pair - cancelled
                current = (current - {(gone[1], gone[0])}) | {other}
            # with no cancellation the child solution already works upstairs
        else:
            raise InternalInvariantError(f"unliftable trace rule {rec.rule!r}")
        _check(parent, current, rec.rule)
    return frozenset(current)
