"""Small numerical helpers shared by the sampler and the studies."""

from __future__ import annotations

import numpy as np

TINY = np.finfo(float).tiny


def log_dirichlet(alpha: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Log of a Dirichlet draw along the last axis, stable for tiny concentrations.

    Uses ``log G(a) = log G(a + 1) + log(U) / a`` so no gamma variate has to be
    represented below the float range.
    """
    alpha = np.asarray(alpha, dtype=float)
    if np.any(alpha <= 0):
        raise ValueError("Dirichlet concentrations must be positive")
    g = np.log(rng.standard_gamma(alpha + 1.0)) + np.log(rng.random(alpha.shape)) / alpha
    g -= g.max(axis=-1, keepdims=True)
    return g - np.log(np.exp(g).sum(axis=-1, keepdims=True))


def dirichlet(alpha: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Dirichlet draw (rows along the last axis) floored at the smallest normal float."""
    x = np.maximum(np.exp(log_dirichlet(alpha, rng)), TINY)
    return x / x.sum(axis=-1, keepdims=True)


def categorical_log(logp: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """One draw per row from unnormalized log-probabilities (last axis)."""
    logp = np.atleast_2d(np.asarray(logp, dtype=float))
    top = logp.max(axis=-1, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    w = np.exp(logp - top)
    cum = np.cumsum(w, axis=-1)
    total = cum[..., -1:]
    if np.any(~(total > 0)):
        raise FloatingPointError("a categorical row has no positive mass")
    u = rng.random(total.shape) * total
    out = (cum <= u).sum(axis=-1)
    return np.minimum(out, logp.shape[-1] - 1)


def safe_log(x: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(x, TINY))


def stick_weights(fractions: np.ndarray) -> np.ndarray:
    """Weights ``v_l prod_{t<l} (1 - v_t)`` along the last axis.

    The last fraction is expected to be 1 so the weights sum to one.
    """
    fractions = np.asarray(fractions, dtype=float)
    rest = np.cumprod(1.0 - fractions, axis=-1)
    before = np.concatenate([np.ones(fractions.shape[:-1] + (1,)), rest[..., :-1]], axis=-1)
    return fractions * before


def spawn_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    """Child seeds ``0..n-1`` of ``SeedSequence(seed)``; child ``i`` never depends on ``n``."""
    return [np.random.SeedSequence(seed, spawn_key=(i,)) for i in range(n)]
