"""Product partitions of the cell space and the PARAFAC expansions they induce.

A block is a tuple with one frozenset of levels per variable. Conditioning on
the blocks of a partition defines a latent class; when the variables are
conditionally independent inside every block, the block probabilities and
conditional marginals form an exact PARAFAC expansion with one term per block.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..tensors import Parafac
from .hitting import HCollection

Block = tuple[frozenset, ...]


@dataclass(frozen=True)
class Partition:
    scheme: tuple[int, ...]
    blocks: tuple[Block, ...]
    H: HCollection | None = None
    merged_on: int | None = None
    free: frozenset = frozenset()

    def __len__(self) -> int:
        return len(self.blocks)

    def check(self) -> None:
        """Raise unless the blocks are disjoint and cover every cell."""
        seen = np.zeros(self.scheme, dtype=int)
        for block in self.blocks:
            seen[np.ix_(*[sorted(b) for b in block])] += 1
        if not np.all(seen == 1):
            raise ValueError("blocks do not partition the cell space")


def variable_blocks(levels: Sequence[int] | frozenset, d: int) -> list[frozenset]:
    """Singletons of the listed levels followed by their complement (if nonempty)."""
    chosen = sorted(set(levels))
    out = [frozenset([c]) for c in chosen]
    rest = frozenset(range(d)) - set(chosen)
    if rest:
        out.append(rest)
    return out


def build_partition(H: HCollection, scheme: Sequence[int]) -> Partition:
    scheme = tuple(scheme)
    H = tuple(frozenset(h) for h in H)
    per_var = [variable_blocks(h, d) for h, d in zip(H, scheme)]
    return Partition(scheme, tuple(itertools.product(*per_var)), H, None)


def merge_partition(part: Partition, l: int, free=()) -> Partition:
    """Merge the blocks whose projections off variable ``l`` are all singletons.

    Every such group shares one cell ``alpha`` of the other variables and is
    replaced by ``alpha x (all levels of l)``. Variables in ``free`` (those
    independent of all others, whose projection is always the full level set)
    are left out of the singleton test.
    """
    free = frozenset(free)
    if part.merged_on is not None:
        raise ValueError(f"partition already merged on variable {part.merged_on}")
    if part.H is None:
        raise ValueError("merge needs a partition built from an H collection")
    full = frozenset(range(part.scheme[l]))
    out: list[Block] = []
    placed = set()
    for block in part.blocks:
        rest = block[:l] + block[l + 1:]
        if all(len(b) == 1 for j, b in enumerate(block) if j != l and j not in free):
            if rest in placed:
                continue
            placed.add(rest)
            out.append(block[:l] + (full,) + block[l + 1:])
        else:
            out.append(block)
    return Partition(part.scheme, tuple(out), part.H, l, free)


def merge_blocks(part: Partition, a: int, b: int) -> Partition:
    """Union of two blocks that differ on exactly one variable.

    Used to build coarsenings that need not preserve conditional independence.
    """
    A, B = part.blocks[a], part.blocks[b]
    diff = [j for j in range(len(A)) if A[j] != B[j]]
    if len(diff) != 1:
        raise ValueError("blocks must differ on exactly one variable to form a product union")
    j = diff[0]
    merged = A[:j] + (A[j] | B[j],) + A[j + 1:]
    blocks = [blk for i, blk in enumerate(part.blocks) if i not in (a, b)]
    blocks.insert(min(a, b), merged)
    return Partition(part.scheme, tuple(blocks), part.H, part.merged_on, part.free)


def find_block(part: Partition, block: Sequence) -> int:
    target = tuple(frozenset(b) for b in block)
    return part.blocks.index(target)


def expected_merged_size(H: HCollection, l: int, scheme: Sequence[int], free=()) -> int:
    """Block count after merging: ``|P0| - |A| * |H_l|`` with ``|A|`` the number of
    singleton-only cells off ``l``."""
    total = math.prod(len(variable_blocks(h, d)) for h, d in zip(H, scheme))
    singletons = 1
    for j, (h, d) in enumerate(zip(H, scheme)):
        if j == l or j in free:
            continue
        singletons *= sum(1 for blk in variable_blocks(h, d) if len(blk) == 1)
    return total - singletons * (len(variable_blocks(H[l], scheme[l])) - 1)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CIResult:
    ok: bool
    worst: float
    worst_block: int


def _sub(pi: np.ndarray, block: Block) -> np.ndarray:
    return pi[np.ix_(*[sorted(b) for b in block])]


def verify_conditional_independence(pi: np.ndarray, part: Partition, tol: float = 1e-12) -> CIResult:
    """Max over blocks and cells of ``|Pr(cell | A) - prod_j Pr(y_j | A)|``."""
    pi = np.asarray(pi, dtype=float)
    worst, where = 0.0, -1
    for idx, block in enumerate(part.blocks):
        sub = _sub(pi, block)
        mass = sub.sum()
        if not mass > 0:
            raise ZeroDivisionError(f"block {idx} has zero probability")
        cond = sub / mass
        prod = np.ones(())
        for ax in range(cond.ndim):
            other = tuple(a for a in range(cond.ndim) if a != ax)
            prod = np.multiply.outer(prod, cond.sum(axis=other))
        gap = float(np.abs(cond - prod).max())
        if gap > worst:
            worst, where = gap, idx
    return CIResult(worst <= tol, worst, where)


class ConditionalIndependenceFailed(ValueError):
    pass


def parafac_from_partition(pi: np.ndarray, part: Partition, tol: float = 1e-10) -> Parafac:
    """One term per block: block probability and the conditional marginals."""
    pi = np.asarray(pi, dtype=float)
    ci = verify_conditional_independence(pi, part, tol)
    if not ci.ok:
        raise ConditionalIndependenceFailed(
            f"block {ci.worst_block} violates conditional independence by {ci.worst:.3e}"
        )
    p = pi.ndim
    weights = np.empty(len(part))
    arms = [np.zeros((len(part), d)) for d in pi.shape]
    for h, block in enumerate(part.blocks):
        sub = _sub(pi, block)
        mass = sub.sum()
        weights[h] = mass
        for j in range(p):
            other = tuple(a for a in range(p) if a != j)
            arms[j][h, sorted(block[j])] = sub.sum(axis=other) / mass
    return Parafac(weights, tuple(arms))
