"""Dense probability tensors and the PARAFAC, Tucker and collapsed-Tucker families.

Tensors are plain ``numpy`` arrays with one axis per variable. Expansions keep
their arms as ``(terms, d_j)`` arrays. A :class:`Parafac` may hold an
unnormalized witness (nonnegative arms of any scale, unit weights) or a
normalized probabilistic expansion; :meth:`Parafac.normalized` converts the
former into the latter by absorbing arm scales into the weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .loglinear import MAX_CELLS, CapExceeded, n_cells

SIMPLEX_TOL = 1e-12


class SchemeMismatch(ValueError):
    pass


def check_probability(pi: np.ndarray, tol: float = SIMPLEX_TOL) -> None:
    if np.any(pi < 0):
        raise ValueError("negative entries in probability tensor")
    total = float(pi.sum())
    if abs(total - 1.0) > tol * max(1, pi.size):
        raise ValueError(f"probability tensor sums to {total!r}")


def _check_cap(shape, cap=MAX_CELLS):
    if n_cells(tuple(shape)) > cap:
        raise CapExceeded(f"{n_cells(tuple(shape))} cells exceeds cap {cap}")


def _as_arms(arms: Sequence[np.ndarray]) -> tuple[np.ndarray, ...]:
    return tuple(np.atleast_2d(np.asarray(a, dtype=float)) for a in arms)


@dataclass(frozen=True)
class Parafac:
    """``sum_h weights[h] * outer(arms[0][h], ..., arms[p-1][h])``."""

    weights: np.ndarray
    arms: tuple[np.ndarray, ...]

    def __post_init__(self):
        arms = _as_arms(self.arms)
        weights = np.asarray(self.weights, dtype=float).reshape(-1)
        for a in arms:
            if a.shape[0] != weights.shape[0]:
                raise ValueError("every arm needs one row per term")
        if np.any(weights < 0) or any(np.any(a < 0) for a in arms):
            raise ValueError("PARAFAC terms must be nonnegative")
        object.__setattr__(self, "arms", arms)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_terms(cls, arms: Sequence[np.ndarray]) -> "Parafac":
        arms = _as_arms(arms)
        return cls(np.ones(arms[0].shape[0]), arms)

    @property
    def n_terms(self) -> int:
        return self.weights.shape[0]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.shape[1] for a in self.arms)

    def normalized(self) -> "Parafac":
        """Arms on their simplices, all scale carried by the weights.

        Terms whose scale is zero are dropped.
        """
        scale = self.weights.copy()
        arms = []
        for a in self.arms:
            s = a.sum(axis=1)
            scale = scale * s
            arms.append(np.divide(a, s[:, None], out=np.zeros_like(a), where=s[:, None] > 0))
        keep = scale > 0
        return Parafac(scale[keep], tuple(a[keep] for a in arms))

    def to_tensor(self) -> np.ndarray:
        return eval_parafac(self)


def eval_parafac(exp: Parafac) -> np.ndarray:
    _check_cap(exp.shape)
    m = exp.n_terms
    out = exp.weights.copy()
    for j, arm in enumerate(exp.arms):
        out = out[..., None] * arm.reshape((m,) + (1,) * j + (arm.shape[1],))
    return out.sum(axis=0)


@dataclass(frozen=True)
class Tucker:
    """Core tensor of shape ``(m,) * p`` and ``m`` arms per variable."""

    core: np.ndarray
    arms: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "core", np.asarray(self.core, dtype=float))
        object.__setattr__(self, "arms", _as_arms(self.arms))
        if self.core.ndim != len(self.arms):
            raise ValueError("Tucker core needs one axis per variable")


def eval_tucker(exp: Tucker) -> np.ndarray:
    _check_cap(tuple(a.shape[1] for a in exp.arms))
    out = exp.core
    for arm in exp.arms:
        # contract the leading core axis; the new variable axis goes last
        out = np.tensordot(out, arm, axes=([0], [0]))
    return out


@dataclass(frozen=True)
class CTucker:
    """Collapsed Tucker: ``groups[j]`` picks the core axis that drives variable ``j``."""

    groups: tuple[int, ...]
    core: np.ndarray
    arms: tuple[np.ndarray, ...]

    def __post_init__(self):
        core = np.asarray(self.core, dtype=float)
        groups = tuple(int(s) for s in self.groups)
        arms = _as_arms(self.arms)
        if len(groups) != len(arms):
            raise ValueError("one group label per variable")
        k = core.ndim
        for s in groups:
            if not 0 <= s < k:
                raise ValueError(f"group label {s} outside 0..{k - 1}")
        object.__setattr__(self, "core", core)
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "arms", arms)


def eval_ctucker(exp: CTucker) -> np.ndarray:
    p = len(exp.arms)
    _check_cap(tuple(a.shape[1] for a in exp.arms))
    k = exp.core.ndim
    out = exp.core
    order: list[int] = []
    for s in range(k):
        members = [j for j in range(p) if exp.groups[j] == s]
        m = exp.core.shape[s]
        block = np.ones(m)
        for j in members:
            block = block[..., None] * exp.arms[j].reshape((m,) + (1,) * (block.ndim - 1) + (-1,))
        out = np.tensordot(out, block, axes=([0], [0]))
        order.extend(members)
    return np.transpose(out, np.argsort(order))


# ---------------------------------------------------------------------------
# composition of nonnegative tensors and their witnesses


def hadamard(a, b):
    """Entrywise product of two tensors, or the product witness of two PARAFACs.

    For witnesses with ``m`` and ``k`` terms the result has ``m * k`` terms
    whose arms are the entrywise products of the input arms.
    """
    if isinstance(a, Parafac) and isinstance(b, Parafac):
        if a.shape != b.shape:
            raise SchemeMismatch(f"{a.shape} vs {b.shape}")
        weights = np.outer(a.weights, b.weights).reshape(-1)
        arms = tuple(
            (x[:, None, :] * y[None, :, :]).reshape(-1, x.shape[1]) for x, y in zip(a.arms, b.arms)
        )
        return Parafac(weights, arms)
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise SchemeMismatch(f"{a.shape} vs {b.shape}")
    return a * b


def add(a, b):
    """Entrywise sum, or the concatenated ``m + k`` term witness."""
    if isinstance(a, Parafac) and isinstance(b, Parafac):
        if a.shape != b.shape:
            raise SchemeMismatch(f"{a.shape} vs {b.shape}")
        return Parafac(
            np.concatenate([a.weights, b.weights]),
            tuple(np.vstack([x, y]) for x, y in zip(a.arms, b.arms)),
        )
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        raise SchemeMismatch(f"{a.shape} vs {b.shape}")
    return a + b


def join_independent(parts: Sequence[tuple[Sequence[int], Parafac]]) -> Parafac:
    """Product of independent group PARAFACs as one joint witness.

    ``parts`` pairs each group's variables (in the order of that PARAFAC's
    arms) with its expansion. The groups must partition ``0..p-1``; the
    result has ``prod(m_s)`` terms.
    """
    variables = [j for vs, _ in parts for j in vs]
    p = len(variables)
    if sorted(variables) != list(range(p)):
        raise ValueError(f"groups {[list(vs) for vs, _ in parts]} do not partition the variables")
    sizes = [exp.n_terms for _, exp in parts]
    grid = np.indices(sizes).reshape(len(sizes), -1)
    weights = np.ones(grid.shape[1])
    arms: list[np.ndarray | None] = [None] * p
    for g, (vs, exp) in enumerate(parts):
        weights = weights * exp.weights[grid[g]]
        for local, j in enumerate(vs):
            arms[j] = exp.arms[local][grid[g]]
    return Parafac(weights, tuple(arms))


def construct_2d_expansion(
    M: np.ndarray,
    lam1: np.ndarray,
    lam2: np.ndarray,
    H: tuple[Sequence[int], Sequence[int]],
    tol: float = 1e-12,
) -> Parafac:
    """Exact ``1 + |H1| + |H2|`` term nonnegative expansion of a matrix.

    ``H`` lists rows and columns that together contain every cell where ``M``
    differs from ``outer(lam1, lam2)``. Terms: the baseline with rows ``H1``
    and columns ``H2`` zeroed, one term per listed row carrying that row of
    ``M``, and one per listed column carrying that column off the listed rows.
    """
    M = np.asarray(M, dtype=float)
    lam1 = np.asarray(lam1, dtype=float)
    lam2 = np.asarray(lam2, dtype=float)
    H1, H2 = sorted(set(H[0])), sorted(set(H[1]))
    if M.ndim != 2 or M.shape != (lam1.size, lam2.size):
        raise ValueError("M must be a matrix matching the baseline vectors")
    off = np.abs(M - np.outer(lam1, lam2)) > tol * max(1.0, float(np.abs(M).max()))
    covered = np.zeros_like(off)
    covered[H1, :] = True
    covered[:, H2] = True
    if np.any(off & ~covered):
        bad = [tuple(int(x) for x in c) for c in np.argwhere(off & ~covered)[:5]]
        raise ValueError(f"H does not cover the cells that differ from the baseline, e.g. {bad}")
    d1, d2 = M.shape
    rows1 = [lam1 * ~np.isin(np.arange(d1), H1)]
    rows2 = [lam2 * ~np.isin(np.arange(d2), H2)]
    for r in H1:
        rows1.append(np.eye(d1)[r])
        rows2.append(M[r].copy())
    outside = ~np.isin(np.arange(d1), H1)
    for c in H2:
        rows1.append(M[:, c] * outside)
        rows2.append(np.eye(d2)[c])
    return Parafac.from_terms([np.array(rows1), np.array(rows2)])


# ---------------------------------------------------------------------------
# plumbing


def marginal(pi: np.ndarray, J: Sequence[int]) -> np.ndarray:
    """Marginal over the variables in ``J`` (axes kept in ascending order)."""
    J = sorted(set(J))
    drop = tuple(ax for ax in range(pi.ndim) if ax not in J)
    return pi.sum(axis=drop)


def block_mask(shape: Sequence[int], block: Sequence) -> tuple[np.ndarray, ...]:
    """Per-axis boolean masks for a product event; ``None`` means every level."""
    masks = []
    for d, levels in zip(shape, block):
        m = np.zeros(d, dtype=bool)
        if levels is None:
            m[:] = True
        else:
            m[list(levels)] = True
        masks.append(m)
    return tuple(masks)


def condition(pi: np.ndarray, block: Sequence) -> np.ndarray:
    """Distribution of ``pi`` conditioned on a product event."""
    masks = block_mask(pi.shape, block)
    mask = masks[0]
    for m in masks[1:]:
        mask = np.multiply.outer(mask, m)
    out = np.where(mask, pi, 0.0)
    mass = out.sum()
    if not mass > 0:
        raise ZeroDivisionError("conditioning event has zero probability")
    return out / mass


def product_tensor(arms: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones(())
    for a in arms:
        out = np.multiply.outer(out, np.asarray(a, dtype=float))
    return out
