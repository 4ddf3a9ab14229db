"""Level collections H that hit every nonzero two-way interaction.

A nonzero two-way coefficient ``theta_{a,b}(ca, cb)`` is an edge between the
variable-levels ``(a, ca)`` and ``(b, cb)``; an admissible H is a vertex cover
of that graph. Covers are enumerated depth first in a canonical order so every
search is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator

from ..loglinear import CapExceeded, SupportSummary

Vertex = tuple[int, int]
HCollection = tuple[frozenset, ...]

DEFAULT_NODE_CAP = 10**6


@dataclass
class SearchStats:
    nodes: int = 0
    yielded: int = 0
    complete: bool = True


class CoverGraph:
    def __init__(self, summary: SupportSummary):
        self.p = len(summary.scheme)
        edges = set()
        for (a, b), (ca, cb) in summary.C_theta2:
            edges.add(((a, ca), (b, cb)))
        self.edges = sorted(edges)
        self.vertices = sorted({v for e in self.edges for v in e})
        self.neighbors: dict[Vertex, list[Vertex]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            self.neighbors[u].append(v)
            self.neighbors[v].append(u)
        for v in self.neighbors:
            self.neighbors[v].sort()

    def without(self, variables) -> "CoverGraph":
        """Copy with every edge touching ``variables`` dropped (treated as covered)."""
        drop = set(variables)
        out = object.__new__(CoverGraph)
        out.p = self.p
        out.edges = [(u, v) for u, v in self.edges if u[0] not in drop and v[0] not in drop]
        out.vertices = sorted({v for e in out.edges for v in e})
        out.neighbors = {v: [] for v in out.vertices}
        for u, v in out.edges:
            out.neighbors[u].append(v)
            out.neighbors[v].append(u)
        for v in out.neighbors:
            out.neighbors[v].sort()
        return out

    def to_H(self, chosen) -> HCollection:
        levels: list[set[int]] = [set() for _ in range(self.p)]
        for j, c in chosen:
            levels[j].add(c)
        return tuple(frozenset(s) for s in levels)

    def is_cover(self, chosen) -> bool:
        return all(u in chosen or v in chosen for u, v in self.edges)

    def is_minimal(self, chosen) -> bool:
        return all(any(n not in chosen for n in self.neighbors[v]) for v in chosen)


def H_key(H: HCollection) -> tuple:
    """Lexicographic tie-break key for collections."""
    return tuple(tuple(sorted(h)) for h in H)


def H_sizes(H: HCollection) -> tuple[int, ...]:
    return tuple(len(h) for h in H)


def is_admissible(summary: SupportSummary, H: HCollection) -> bool:
    """Every nonzero two-way key has a level inside H on one of its variables."""
    return all(any(c in H[j] for j, c in zip(E, lv)) for E, lv in summary.C_theta2)


def minimal_covers(
    graph: CoverGraph,
    prune: Callable[[set], bool] | None = None,
    cap: int = DEFAULT_NODE_CAP,
    stats: SearchStats | None = None,
) -> Iterator[frozenset]:
    """Inclusion-minimal vertex covers.

    Branching on the first uncovered edge ``(u, v)``: either ``u`` joins the
    cover, or ``u`` is excluded and all of its neighbours join. The two
    branches are disjoint, so no cover is produced twice. ``prune(partial)``
    may cut a branch whose partial cover can no longer win.
    """
    stats = stats if stats is not None else SearchStats()

    def visit(chosen: set, excluded: set) -> Iterator[frozenset]:
        stats.nodes += 1
        if stats.nodes > cap:
            stats.complete = False
            raise _Stop
        if prune is not None and prune(chosen):
            return
        edge = next(((u, v) for u, v in graph.edges if u not in chosen and v not in chosen), None)
        if edge is None:
            if graph.is_minimal(chosen):
                stats.yielded += 1
                yield frozenset(chosen)
            return
        u, v = edge
        if u in excluded and v in excluded:
            return
        if u in excluded or v in excluded:
            forced = v if u in excluded else u
            yield from visit(chosen | {forced}, excluded)
            return
        yield from visit(chosen | {u}, excluded)
        nbrs = graph.neighbors[u]
        if not any(n in excluded for n in nbrs):
            yield from visit(chosen | set(nbrs), excluded | {u})

    try:
        yield from visit(set(), set())
    except _Stop:
        return


def all_covers(
    graph: CoverGraph,
    prune: Callable[[set], bool] | None = None,
    cap: int = DEFAULT_NODE_CAP,
    stats: SearchStats | None = None,
) -> Iterator[frozenset]:
    """Every vertex cover, by include-first decisions over the sorted vertices."""
    stats = stats if stats is not None else SearchStats()
    order = graph.vertices
    position = {v: i for i, v in enumerate(order)}

    def visit(i: int, chosen: set, excluded: set) -> Iterator[frozenset]:
        stats.nodes += 1
        if stats.nodes > cap:
            stats.complete = False
            raise _Stop
        if prune is not None and prune(chosen):
            return
        if i == len(order):
            stats.yielded += 1
            yield frozenset(chosen)
            return
        v = order[i]
        yield from visit(i + 1, chosen | {v}, excluded)
        # excluding v needs every neighbour in the cover; earlier ones are decided
        nbrs = graph.neighbors[v]
        if all(n in chosen for n in nbrs if position[n] < i):
            yield from visit(i + 1, chosen, excluded | {v})

    try:
        yield from visit(0, set(), set())
    except _Stop:
        return


class _Stop(Exception):
    pass


def enumerate_H(summary: SupportSummary, cap: int = DEFAULT_NODE_CAP) -> Iterator[HCollection]:
    """Admissible collections: the inclusion-minimal ones first, then the rest.

    Collections only use interacting levels. ``cap`` bounds the number of
    search nodes across both phases.
    """
    graph = CoverGraph(summary)
    stats = SearchStats()
    minimal = []
    for cover in minimal_covers(graph, cap=cap, stats=stats):
        minimal.append(cover)
        yield graph.to_H(cover)
    if not stats.complete:
        if not minimal:
            raise CapExceeded("node cap reached before any admissible H was found")
        return
    seen = set(minimal)
    rest = SearchStats(nodes=stats.nodes)
    for cover in all_covers(graph, cap=cap, stats=rest):
        if cover not in seen:
            yield graph.to_H(cover)
