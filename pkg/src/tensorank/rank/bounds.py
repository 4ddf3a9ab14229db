"""Upper bounds on nonnegative PARAFAC and Tucker rank from the interaction support."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

from ..loglinear import (
    LogLinearModel,
    CapExceeded,
    NotWeaklyHierarchical,
    SupportSummary,
    is_weakly_hierarchical,
    support_summary,
)
from .hitting import (
    DEFAULT_NODE_CAP,
    CoverGraph,
    HCollection,
    SearchStats,
    H_key,
    minimal_covers,
)

MAX_EXHAUSTIVE_P = 10


def _require_wh(model: LogLinearModel, ignore_main_effects: bool) -> SupportSummary:
    if not is_weakly_hierarchical(model, ignore_main_effects=ignore_main_effects):
        raise NotWeaklyHierarchical("rank bounds need a weakly hierarchical model")
    return support_summary(model)


def _pair_levels(summary: SupportSummary) -> list[list[set[int]]]:
    """``out[a][b]``: levels of ``a`` with a nonzero two-way term against ``b``."""
    p = len(summary.scheme)
    out = [[set() for _ in range(p)] for _ in range(p)]
    for (a, b), (ca, cb) in summary.C_theta2:
        out[a][b].add(ca)
        out[b][a].add(cb)
    return out


# ---------------------------------------------------------------------------
# ordering bound


@dataclass(frozen=True)
class OrderingBound:
    value: int
    order: tuple[int, ...]
    B: tuple[frozenset, ...]
    search: str


def ordering_sets(summary: SupportSummary, order: Sequence[int]) -> tuple[frozenset, ...]:
    """Levels of each variable interacting with some later variable in ``order``."""
    pl = _pair_levels(summary)
    sets = []
    for pos, v in enumerate(order[:-1]):
        later = order[pos + 1:]
        sets.append(frozenset().union(*(pl[v][f] for f in later)))
    return tuple(sets)


def ordering_value(summary: SupportSummary, order: Sequence[int]) -> int:
    return math.prod(len(b) + 1 for b in ordering_sets(summary, order))


def theorem1_bound(
    model: LogLinearModel,
    search: Literal["auto", "exhaustive", "greedy"] = "auto",
    ignore_main_effects: bool = False,
    max_exhaustive_p: int = MAX_EXHAUSTIVE_P,
) -> OrderingBound:
    """Minimum over variable orderings of ``prod_j (|B_sigma(j)| + 1)``.

    The exhaustive search is a dynamic program over the set of variables still
    to be placed, so it is exact over all ``p!`` orderings; ties resolve to the
    lexicographically smallest ordering. Greedy places next the variable with
    the fewest levels interacting with the remaining ones.
    """
    summary = _require_wh(model, ignore_main_effects)
    p = model.p
    if search == "auto":
        search = "exhaustive" if p <= max_exhaustive_p else "greedy"
    if search == "exhaustive" and p > max_exhaustive_p:
        raise ValueError(f"exhaustive ordering search capped at p <= {max_exhaustive_p}")
    pl = _pair_levels(summary)

    def factor(v: int, rest: int) -> int:
        levels = set()
        for f in range(p):
            if rest >> f & 1:
                levels |= pl[v][f]
        return len(levels) + 1

    if search == "greedy":
        remaining = list(range(p))
        order = []
        while len(remaining) > 1:
            rest_mask = lambda v: sum(1 << f for f in remaining if f != v)
            v = min(remaining, key=lambda v: (factor(v, rest_mask(v)), v))
            order.append(v)
            remaining.remove(v)
        order += remaining
    else:
        full = (1 << p) - 1
        best: dict[int, int] = {}
        for mask in sorted(range(1, full + 1), key=lambda m: bin(m).count("1")):
            if mask & (mask - 1) == 0:
                best[mask] = 1
                continue
            best[mask] = min(
                factor(v, mask & ~(1 << v)) * best[mask & ~(1 << v)]
                for v in range(p) if mask >> v & 1
            )
        order = []
        mask = full
        while mask & (mask - 1):
            for v in range(p):
                if mask >> v & 1:
                    rest = mask & ~(1 << v)
                    if factor(v, rest) * best[rest] == best[mask]:
                        order.append(v)
                        mask = rest
                        break
        order.append(mask.bit_length() - 1)
    order = tuple(order)
    B = ordering_sets(summary, order)
    return OrderingBound(math.prod(len(b) + 1 for b in B), order, B, search)


def theorem1_bruteforce(model: LogLinearModel, ignore_main_effects: bool = False) -> OrderingBound:
    """Reference search over every permutation (small ``p`` only)."""
    summary = _require_wh(model, ignore_main_effects)
    best = None
    for order in itertools.permutations(range(model.p)):
        value = ordering_value(summary, order)
        if best is None or value < best[0]:
            best = (value, order)
    value, order = best
    return OrderingBound(value, order, ordering_sets(summary, order), "bruteforce")


# ---------------------------------------------------------------------------
# hitting-collection bounds


def product_value(H: HCollection, V_star: Sequence[int]) -> int:
    return math.prod(len(H[j]) + 1 for j in V_star)


def merge_reduction(H: HCollection, l: int, scheme: Sequence[int], V_star: Sequence[int]) -> int:
    """Blocks removed by merging on ``l``: ``prod_{W_l}(|H_j|+1) * prod_{W_l bar} |H_j|``."""
    out = 1
    for j in V_star:
        full = j != l and len(H[j]) == scheme[j] - 1
        out *= len(H[j]) + 1 if full else len(H[j])
    return out


def tight_value(H: HCollection, l: int, scheme: Sequence[int], V_star: Sequence[int]) -> int:
    return product_value(H, V_star) - merge_reduction(H, l, scheme, V_star)


@dataclass(frozen=True)
class CoverBound:
    value: int
    H: HCollection
    stats: SearchStats = field(compare=False)
    V_star: tuple[int, ...] = ()


@dataclass(frozen=True)
class TightBound:
    value: int
    H: HCollection
    l: int
    W: frozenset
    W_bar: frozenset
    stats: SearchStats = field(compare=False)
    V_star: tuple[int, ...] = ()


def _trivial_H(p: int) -> HCollection:
    return tuple(frozenset() for _ in range(p))


def theorem2_bound(
    model: LogLinearModel, ignore_main_effects: bool = False, cap: int = DEFAULT_NODE_CAP
) -> CoverBound:
    """``min_H prod_{j in V*} (|H_j| + 1)`` over admissible H.

    The product is monotone in H, so only minimal covers are searched, with a
    branch-and-bound cut on the partial product.
    """
    summary = _require_wh(model, ignore_main_effects)
    V_star = summary.V_star
    graph = CoverGraph(summary)
    stats = SearchStats()
    best: list = [math.inf, None]

    def prune(chosen) -> bool:
        return product_value(graph.to_H(chosen), V_star) > best[0]

    for cover in minimal_covers(graph, prune=prune, cap=cap, stats=stats):
        H = graph.to_H(cover)
        cand = (product_value(H, V_star), H_key(H))
        if best[1] is None or cand < (best[0], H_key(best[1])):
            best = [cand[0], H]
    if best[1] is None:
        return CoverBound(1, _trivial_H(model.p), stats, V_star)
    return CoverBound(int(best[0]), best[1], stats, V_star)


def theorem2_tight_bound(
    model: LogLinearModel, ignore_main_effects: bool = False, cap: int = DEFAULT_NODE_CAP
) -> TightBound:
    """Minimum over admissible H and ``l in V*`` of the merged-partition block count.

    The merge saving is not monotone in H: growing some ``H_j`` to all of its
    nonzero levels can lower the count. For a fixed set F of such "full"
    variables the count is monotone in the remaining ``H_j``, so the search
    runs over F and, for each, over the minimal covers of the edges F leaves
    uncovered. A partial collection with product P can finish no lower than
    ``P / max_l d_l``, which gives the pruning rule.
    """
    summary = _require_wh(model, ignore_main_effects)
    V_star = summary.V_star
    scheme = model.scheme
    if not V_star:
        H = _trivial_H(model.p)
        return TightBound(1, H, 0, frozenset(), frozenset(), SearchStats(), V_star)
    graph = CoverGraph(summary)
    stats = SearchStats()
    dmax = max(scheme[j] for j in V_star)
    best: list = [None]

    def consider(H: HCollection) -> None:
        for l in V_star:
            cand = (tight_value(H, l, scheme, V_star), H_key(H), l, H)
            if best[0] is None or cand[:3] < best[0][:3]:
                best[0] = cand

    for size in range(len(V_star) + 1):
        for F in itertools.combinations(V_star, size):
            base = [set() for _ in range(model.p)]
            for j in F:
                base[j] = set(range(1, scheme[j]))
            if best[0] is not None and math.prod(scheme[j] for j in F) > best[0][0] * dmax:
                continue
            sub = graph.without(F)

            def prune(chosen, base=base) -> bool:
                if best[0] is None:
                    return False
                H = graph.to_H(chosen)
                H = tuple(frozenset(h | b) for h, b in zip(H, base))
                return product_value(H, V_star) > best[0][0] * dmax

            try:
                for cover in minimal_covers(sub, prune=prune, cap=cap, stats=stats):
                    H = tuple(frozenset(h | b) for h, b in zip(sub.to_H(cover), base))
                    consider(H)
            except CapExceeded:
                pass
            if not stats.complete:
                break
        if not stats.complete:
            break
    if best[0] is None:
        raise CapExceeded("node cap reached before any admissible H was found")
    value, _, l, H = best[0]
    W = frozenset(j for j in V_star if j != l and len(H[j]) == scheme[j] - 1)
    return TightBound(int(value), H, l, W, frozenset(V_star) - W, stats, V_star)


def tucker_rank_bound(
    model: LogLinearModel, ignore_main_effects: bool = False, cap: int = DEFAULT_NODE_CAP
) -> CoverBound:
    """``min_H max_j (|H_j| + 1)``, searched over minimal covers."""
    summary = _require_wh(model, ignore_main_effects)
    V_star = summary.V_star
    graph = CoverGraph(summary)
    stats = SearchStats()
    best: list = [None]
    for cover in minimal_covers(graph, cap=cap, stats=stats):
        H = graph.to_H(cover)
        cand = (max((len(H[j]) + 1 for j in V_star), default=1), H_key(H), H)
        if best[0] is None or cand[:2] < best[0][:2]:
            best[0] = cand
    if best[0] is None:
        return CoverBound(1, _trivial_H(model.p), stats, V_star)
    return CoverBound(best[0][0], best[0][2], stats, V_star)


# ---------------------------------------------------------------------------
# corollaries


class ConditionNotMet(ValueError):
    pass


@dataclass(frozen=True)
class CorollaryBound:
    name: str
    value: int
    m: int
    J: tuple[int, ...]
    strict: bool


def corollary_bound(
    model: LogLinearModel,
    which: Literal["few-levels", "conditional", "marginal"],
    J: Sequence[int] = (),
    m: int | None = None,
    ignore_main_effects: bool = False,
) -> CorollaryBound:
    """Closed-form bounds that hold under extra structure, after checking it.

    ``few-levels``: every variable has fewer than ``m - 1`` interacting levels;
    the rank is strictly below ``m ** (p - 1)``.
    ``conditional``: no interaction touches two variables outside ``J``;
    the rank is at most ``m ** |J|``.
    ``marginal``: variables outside ``J`` have no interacting level and
    ``|J| < p``; the rank is at most ``m ** |J|``.
    For the last two, ``m`` defaults to ``max_{j in J} |C_j| + 1`` and the
    check is ``|C_j| <= m - 1`` on ``J``.
    """
    summary = _require_wh(model, ignore_main_effects)
    p = model.p
    J = tuple(sorted(set(J)))
    sizes = [len(c) for c in summary.C_j]
    if which == "few-levels":
        if m is None:
            m = max(sizes) + 2
        if not all(s < m - 1 for s in sizes):
            raise ConditionNotMet(f"some variable has at least m - 1 = {m - 1} interacting levels")
        return CorollaryBound(which, m ** (p - 1), m, tuple(range(p)), True)
    if which not in ("conditional", "marginal"):
        raise ValueError(f"unknown corollary {which!r}")
    if m is None:
        m = max((sizes[j] for j in J), default=0) + 1
    if not all(sizes[j] <= m - 1 for j in J):
        raise ConditionNotMet(f"a variable in J has more than m - 1 = {m - 1} interacting levels")
    outside = set(range(p)) - set(J)
    if which == "conditional":
        for E, _ in summary.C_theta:
            if len(outside.intersection(E)) >= 2:
                raise ConditionNotMet(f"interaction on {E} links two variables outside J")
    else:
        if len(J) >= p:
            raise ConditionNotMet("J must be a proper subset of the variables")
        touched = [j for j in outside if j not in summary.U]
        if touched:
            raise ConditionNotMet(f"variables {touched} outside J interact with others")
    return CorollaryBound(which, m ** len(J), m, J, False)
