"""Numerical brackets on the nonnegative PARAFAC rank of a tensor.

The lower end is certified: the nonnegative rank is at least the ordinary
rank of every single-variable unfolding, and for matrices of rank at most two
the two ranks coincide. The upper end is heuristic: the smallest number of
terms for which a multi-restart nonnegative CP fit (hierarchical alternating
least squares) reproduces the tensor to within ``eps`` in max norm, or the
term count of a supplied exact witness.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..tensors import Parafac, SchemeMismatch, eval_parafac


@dataclass
class OracleResult:
    certified_lower: int
    heuristic_upper: int | None
    residuals: dict[int, float] = field(default_factory=dict)
    exact: bool = False
    witness_terms: int | None = None


def unfolding_ranks(t: np.ndarray) -> list[int]:
    t = np.asarray(t, dtype=float)
    ranks = []
    for ax in range(t.ndim):
        mat = np.moveaxis(t, ax, 0).reshape(t.shape[ax], -1)
        ranks.append(int(np.linalg.matrix_rank(mat)))
    return ranks


def _unfoldings(t: np.ndarray) -> list[np.ndarray]:
    """Mode-j unfoldings whose columns run over the other modes in C order."""
    return [np.moveaxis(t, j, 0).reshape(t.shape[j], -1) for j in range(t.ndim)]


def _khatri_rao(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = mats[0]
    for a in mats[1:]:
        out = (out[:, None, :] * a[None, :, :]).reshape(-1, a.shape[1])
    return out


def ntf_hals(
    t: np.ndarray,
    m: int,
    rng: np.random.Generator,
    max_iters: int = 5000,
    eps: float = 1e-8,
    check_every: int = 25,
) -> tuple[Parafac, float]:
    """Fit an ``m``-term nonnegative CP model; returns the fit and its max-norm residual.

    The residual is checked every ``check_every`` sweeps. A fit stops early
    once its observed rate of decrease could not reach ``eps`` within the
    remaining sweeps.
    """
    t = np.asarray(t, dtype=float)
    p = t.ndim
    unf = _unfoldings(t)
    arms = [rng.random((d, m)) + 1e-3 for d in t.shape]
    scale = t.sum() ** (1.0 / p) if t.sum() > 0 else 1.0
    arms = [a * scale / a.sum(axis=0, keepdims=True) for a in arms]
    grams = [a.T @ a for a in arms]
    resid = prev = np.inf
    for it in range(max_iters):
        for j in range(p):
            V = np.ones((m, m))
            for i, g in enumerate(grams):
                if i != j:
                    V *= g
            XK = unf[j] @ _khatri_rao([arms[i] for i in range(p) if i != j])
            A = arms[j]
            for r in range(m):
                if V[r, r] <= 0:
                    continue
                A[:, r] = np.maximum(1e-16, A[:, r] + (XK[:, r] - A @ V[:, r]) / V[r, r])
            grams[j] = A.T @ A
        if (it + 1) % check_every == 0 or it == max_iters - 1:
            approx = arms[0] @ _khatri_rao(arms[1:]).T if p > 1 else arms[0].sum(axis=1, keepdims=True)
            resid = float(np.abs(approx - unf[0]).max())
            if resid < eps:
                break
            if np.isfinite(prev) and resid > 0:
                rate = resid / prev
                left = (max_iters - it - 1) / check_every
                if rate >= 1.0 or resid * rate**left > eps:
                    break
            prev = resid
    return Parafac.from_terms([a.T for a in arms]), resid


def oracle_nonneg_rank(
    t: np.ndarray,
    restarts: int = 20,
    max_iters: int = 5000,
    eps: float = 1e-8,
    m_range: Sequence[int] | None = None,
    seed: int = 0,
    witness: Parafac | None = None,
) -> OracleResult:
    """Bracket ``rnk+`` of ``t`` (scaled to unit sum before fitting).

    Fits are attempted for each ``m`` in ``m_range`` (ascending, starting no
    lower than the certified bound) until one succeeds. A ``witness`` that
    reproduces ``t`` within ``eps`` caps the upper end at its term count.
    Restart seeds are spawned from ``seed``, one per ``(m, restart)``.
    """
    t = np.asarray(t, dtype=float)
    total = t.sum()
    unit = t / total if total > 0 else t
    lower = max(unfolding_ranks(unit))
    result = OracleResult(certified_lower=lower, heuristic_upper=None)
    if lower <= 1 or (t.ndim == 2 and lower <= 2):
        result.heuristic_upper = lower
        result.exact = True
        return result

    cap = None
    if witness is not None:
        if tuple(witness.shape) != t.shape:
            raise SchemeMismatch(f"witness shape {witness.shape} does not match tensor shape {t.shape}")
        err = float(np.abs(eval_parafac(witness) / (total if total > 0 else 1) - unit).max())
        if err < eps:
            cap = witness.n_terms
            result.witness_terms = cap
    if m_range is None:
        hi = cap if cap is not None else int(np.prod(sorted(t.shape)[:-1]))
        m_range = range(lower, hi + 1)
    root = np.random.SeedSequence(seed)
    threads = max(1, int(os.environ.get("TENSORANK_THREADS", "1")))
    for m in sorted(m_range):
        if m < lower:
            continue
        if cap is not None and m >= cap:
            break
        seeds = root.spawn(restarts)

        def attempt(ss):
            return ntf_hals(unit, m, np.random.default_rng(ss), max_iters, eps)[1]

        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                resids = list(pool.map(attempt, seeds))
        else:
            resids = []
            for ss in seeds:
                resids.append(attempt(ss))
                if resids[-1] < eps:
                    break
        result.residuals[m] = min(resids)
        if result.residuals[m] < eps:
            result.heuristic_upper = m
            break
    if result.heuristic_upper is None and cap is not None:
        result.heuristic_upper = cap
    result.exact = result.heuristic_upper == lower
    return result
