"""Bayesian collapsed Tucker model for contingency tables.

Variables are split into ``k`` groups by labels ``s_j``. Observation ``i``
carries a core class ``w_i`` and one latent class ``z_{is}`` per group; given
``z_i`` the variables are independent with ``Pr(y_ij = c) = lam[j][z_{i s_j}, c]``.
Core classes follow truncated stick-breaking weights ``nu`` and, inside core
class ``l``, ``z_{is}`` follows stick-breaking weights ``psi[s, l]``.

Each Gibbs step is a pure function of the current state that returns the new
value of one block of parameters; :func:`gibbs_sweep` chains them in order.
All indices are 0-based.
"""

from __future__ import annotations

import os
import pickle
import tempfile
import warnings
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from ._util import categorical_log, dirichlet, safe_log, stick_weights
from .loglinear import Key, all_keys, coefficient_vector, theta_from_tensor
from .tensors import SchemeMismatch

CHECKPOINT_VERSION = 1
STICK_CEILING = 1.0 - 1e-12


# ---------------------------------------------------------------------------
# configuration and state


def arm_concentrations(schedule: str | Sequence[float], m: int, d: int) -> np.ndarray:
    """Dirichlet concentration ``a_h`` of arm ``h`` for a variable with ``d`` levels.

    ``flat`` gives 1 everywhere. ``decreasing`` gives 1 for the first arm,
    ``1/d`` for the next two and ``1/d**2`` after that.
    """
    if isinstance(schedule, str):
        if schedule == "flat":
            return np.ones(m)
        if schedule == "decreasing":
            a = np.full(m, 1.0 / d**2)
            a[:3] = 1.0 / d
            a[0] = 1.0
            return a
        raise ValueError(f"unknown arm schedule {schedule!r}")
    a = np.asarray(schedule, dtype=float)
    if a.shape != (m,) or np.any(a <= 0):
        raise ValueError("an explicit arm schedule needs m positive values")
    return a


@dataclass(frozen=True)
class Hyperparameters:
    m: int
    k: int
    arm_schedule: str | tuple[float, ...] = "decreasing"
    a_beta: float = 1.0
    b_beta: float = 1.0
    a_delta: float = 1.0
    b_delta: float = 1.0
    groups: tuple[int, ...] | None = None  # fixed labels, or None to learn them

    def __post_init__(self):
        if self.m < 1 or self.k < 1:
            raise ValueError("m and k must be at least 1")
        if min(self.a_beta, self.b_beta, self.a_delta, self.b_delta) <= 0:
            raise ValueError("gamma hyperparameters must be positive")
        if self.groups is not None:
            groups = tuple(int(g) for g in self.groups)
            if any(not 0 <= g < self.k for g in groups):
                raise ValueError(f"fixed group labels must lie in 0..{self.k - 1}")
            object.__setattr__(self, "groups", groups)

    def concentrations(self, scheme: Sequence[int]) -> list[np.ndarray]:
        return [arm_concentrations(self.arm_schedule, self.m, d) for d in scheme]


@dataclass(frozen=True)
class CTuckerState:
    lam: tuple[np.ndarray, ...]  # (m, d_j) per variable
    z: np.ndarray  # (n, k) latent class per observation and group
    w: np.ndarray  # (n,) core class
    nu_star: np.ndarray  # (k,) core stick fractions, last one 1
    zeta: np.ndarray  # (k, k, m) indexed [s, l, h], last h is 1
    s: np.ndarray  # (p,) group labels
    xi: np.ndarray  # (k,) group probabilities
    beta: float
    delta: np.ndarray  # (k,)

    @property
    def m(self) -> int:
        return self.lam[0].shape[0]

    @property
    def k(self) -> int:
        return self.xi.shape[0]

    @property
    def nu(self) -> np.ndarray:
        return stick_weights(self.nu_star)

    @property
    def psi(self) -> np.ndarray:
        return stick_weights(self.zeta)


def check_state(state: CTuckerState, scheme: Sequence[int], n: int | None = None, tol: float = 1e-10) -> None:
    """Raise ``AssertionError`` if any range, simplex or positivity constraint fails."""
    m, k = state.m, state.k
    assert len(state.lam) == len(scheme)
    for lam, d in zip(state.lam, scheme):
        assert lam.shape == (m, d) and np.all(lam >= 0)
        assert np.allclose(lam.sum(axis=1), 1.0, atol=tol)
    if n is not None:
        assert state.z.shape == (n, k) and state.w.shape == (n,)
    assert np.all((state.z >= 0) & (state.z < m))
    assert np.all((state.w >= 0) & (state.w < k))
    assert state.nu_star.shape == (k,) and state.nu_star[-1] == 1.0
    assert np.all((state.nu_star > 0) & (state.nu_star <= 1))
    assert state.zeta.shape == (k, k, m) and np.all(state.zeta[..., -1] == 1.0)
    assert np.all((state.zeta > 0) & (state.zeta <= 1))
    assert np.allclose(state.nu.sum(), 1.0, atol=tol)
    assert np.allclose(state.psi.sum(axis=-1), 1.0, atol=tol)
    assert state.s.shape == (len(scheme),) and np.all((state.s >= 0) & (state.s < k))
    assert np.all(state.xi >= 0) and np.isclose(state.xi.sum(), 1.0, atol=tol)
    assert state.beta > 0 and state.delta.shape == (k,) and np.all(state.delta > 0)


def _check_data(data: np.ndarray, scheme: Sequence[int]) -> np.ndarray:
    data = np.asarray(data)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("data must be a nonempty (n, p) array")
    if data.shape[1] != len(scheme):
        raise SchemeMismatch(f"data has {data.shape[1]} columns, scheme has {len(scheme)} variables")
    data = data.astype(np.int64)
    for j, d in enumerate(scheme):
        if data[:, j].min() < 0 or data[:, j].max() >= d:
            raise ValueError(f"variable {j} has levels outside 0..{d - 1}")
    return data


def _sticks(a: np.ndarray, b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Beta(a, b) fractions with the last entry pinned to 1."""
    out = np.minimum(rng.beta(a, b), STICK_CEILING)
    out[..., -1] = 1.0
    return out


def init_state(
    data: np.ndarray, scheme: Sequence[int], hyper: Hyperparameters, rng: np.random.Generator
) -> CTuckerState:
    """Draw every parameter from the prior and the labels from their prior predictive."""
    scheme = tuple(int(d) for d in scheme)
    data = _check_data(data, scheme)
    n, p = data.shape
    m, k = hyper.m, hyper.k
    beta = float(rng.gamma(hyper.a_beta, 1.0 / hyper.b_beta))
    delta = rng.gamma(hyper.a_delta, 1.0 / hyper.b_delta, size=k)
    nu_star = _sticks(np.ones(k), np.full(k, beta), rng)
    zeta = _sticks(np.ones((k, k, m)), np.broadcast_to(delta[:, None, None], (k, k, m)), rng)
    lam = tuple(dirichlet(np.broadcast_to(a[:, None], (m, d)), rng) for a, d in zip(hyper.concentrations(scheme), scheme))
    if hyper.groups is not None:
        if len(hyper.groups) != p:
            raise ValueError("fixed groups need one label per variable")
        xi = np.bincount(hyper.groups, minlength=k) / p
        s = np.array(hyper.groups, dtype=np.int64)
    else:
        xi = dirichlet(np.full(k, 1.0 / k), rng)
        s = categorical_log(np.broadcast_to(safe_log(xi), (p, k)), rng)
    nu = stick_weights(nu_star)
    w = categorical_log(np.broadcast_to(safe_log(nu), (n, k)), rng)
    psi = stick_weights(zeta)
    z = np.empty((n, k), dtype=np.int64)
    for g in range(k):
        z[:, g] = categorical_log(safe_log(psi[g][w]), rng)
    return CTuckerState(lam, z, w, nu_star, zeta, s, xi, beta, delta)


# ---------------------------------------------------------------------------
# sufficient statistics


def core_counts(w: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
    """``m_l = #{w_i = l}`` and ``m_{l+} = #{w_i > l}``."""
    m_l = np.bincount(w, minlength=k)
    return m_l, m_l.sum() - np.cumsum(m_l)


def class_counts(z: np.ndarray, w: np.ndarray, k: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """``n[s, l, h] = #{w_i = l, z_is = h}`` and ``n_plus[s, l, h] = #{w_i = l, z_is > h}``."""
    n = np.stack([np.bincount(w * m + z[:, g], minlength=k * m).reshape(k, m) for g in range(k)])
    return n, n.sum(axis=-1, keepdims=True) - np.cumsum(n, axis=-1)


def arm_counts(data: np.ndarray, z: np.ndarray, s: np.ndarray, scheme: Sequence[int], m: int) -> list[np.ndarray]:
    """``counts[j][h, c] = #{z_{i s_j} = h, y_ij = c}``."""
    out = []
    for j, d in enumerate(scheme):
        h = z[:, s[j]]
        out.append(np.bincount(h * d + data[:, j], minlength=m * d).reshape(m, d))
    return out


# ---------------------------------------------------------------------------
# Gibbs steps


def draw_arms(state, data, scheme, hyper, rng) -> tuple[np.ndarray, ...]:
    """Step 1: each arm from its Dirichlet full conditional."""
    counts = arm_counts(data, state.z, state.s, scheme, state.m)
    conc = hyper.concentrations(scheme)
    return tuple(dirichlet(a[:, None] + c, rng) for a, c in zip(conc, counts))


def z_log_weights(state, data, g: int) -> np.ndarray:
    """Unnormalized log full conditional of ``z[:, g]``, shape ``(n, m)``."""
    logp = safe_log(state.psi[g][state.w])
    for j in np.flatnonzero(state.s == g):
        logp = logp + safe_log(state.lam[j][:, data[:, j]]).T
    return logp


def draw_z(state, data, rng) -> np.ndarray:
    """Step 2: latent classes, one group at a time."""
    z = np.empty_like(state.z)
    for g in range(state.k):
        z[:, g] = categorical_log(z_log_weights(state, data, g), rng)
    return z


def w_log_weights(state) -> np.ndarray:
    psi = state.psi
    logp = np.broadcast_to(safe_log(state.nu), (state.z.shape[0], state.k)).copy()
    for g in range(state.k):
        logp += safe_log(psi[g][:, state.z[:, g]]).T
    return logp


def draw_w(state, rng) -> np.ndarray:
    """Step 3: core classes."""
    return categorical_log(w_log_weights(state), rng)


def draw_nu_star(state, rng) -> np.ndarray:
    """Step 4: ``nu*_l ~ Beta(1 + m_l, beta + m_{l+})``; the last fraction stays 1."""
    m_l, m_plus = core_counts(state.w, state.k)
    return _sticks(1.0 + m_l, state.beta + m_plus, rng)


def draw_zeta(state, rng) -> np.ndarray:
    """Step 5: ``zeta[s, l, h] ~ Beta(1 + n_lh, delta_s + n_lh+)``; the last fraction stays 1."""
    n, n_plus = class_counts(state.z, state.w, state.k, state.m)
    return _sticks(1.0 + n, state.delta[:, None, None] + n_plus, rng)


def draw_beta(state, hyper, rng) -> float:
    """Step 6: gamma full conditional over the ``k - 1`` free core sticks."""
    free = state.nu_star[:-1]
    rate = hyper.b_beta - np.log1p(-free).sum()
    return float(rng.gamma(hyper.a_beta + free.size, 1.0 / rate))


def draw_delta(state, hyper, rng) -> np.ndarray:
    """Step 7: one gamma draw per group over its ``k (m - 1)`` free sticks."""
    free = state.zeta[..., :-1]
    rate = hyper.b_delta - np.log1p(-free).sum(axis=(1, 2))
    shape = hyper.a_delta + free.shape[1] * free.shape[2]
    return rng.gamma(shape, 1.0 / rate)


def group_log_weights(state, data, j: int) -> np.ndarray:
    """``log xi_l + sum_i log lam[j][z_il, y_ij]`` for every candidate group ``l``."""
    lj = safe_log(state.lam[j])
    loglik = np.array([lj[state.z[:, g], data[:, j]].sum() for g in range(state.k)])
    return safe_log(state.xi) + loglik


def draw_groups(state, data, rng) -> np.ndarray:
    """Step 8: group labels, one variable at a time."""
    s = state.s.copy()
    for j in range(s.size):
        s[j] = categorical_log(group_log_weights(replace(state, s=s), data, j), rng)[0]
    return s


def draw_xi(state, rng) -> np.ndarray:
    """Step 9: ``xi ~ Dirichlet(n_l + 1/k)``."""
    counts = np.bincount(state.s, minlength=state.k)
    return dirichlet(counts + 1.0 / state.k, rng)


def gibbs_sweep(
    state: CTuckerState,
    data: np.ndarray,
    scheme: Sequence[int],
    hyper: Hyperparameters,
    rng: np.random.Generator,
    debug: bool = False,
) -> CTuckerState:
    """One pass of Steps 1 to 9. Steps 8 and 9 are skipped when groups are fixed."""
    steps: list[tuple[str, Callable]] = [
        ("lam", lambda st: draw_arms(st, data, scheme, hyper, rng)),
        ("z", lambda st: draw_z(st, data, rng)),
        ("w", lambda st: draw_w(st, rng)),
        ("nu_star", lambda st: draw_nu_star(st, rng)),
        ("zeta", lambda st: draw_zeta(st, rng)),
        ("beta", lambda st: draw_beta(st, hyper, rng)),
        ("delta", lambda st: draw_delta(st, hyper, rng)),
    ]
    if hyper.groups is None:
        steps += [("s", lambda st: draw_groups(st, data, rng)), ("xi", lambda st: draw_xi(st, rng))]
    for name, step in steps:
        state = replace(state, **{name: step(state)})
        if debug:
            check_state(state, scheme, data.shape[0])
    return state


# ---------------------------------------------------------------------------
# implied probability tensor


def ctucker_tensor(lam: Sequence[np.ndarray], s: np.ndarray, nu: np.ndarray, psi: np.ndarray) -> np.ndarray:
    """``pi[c] = sum_l nu_l prod_g sum_h psi[g, l, h] prod_{j: s_j = g} lam[j][h, c_j]``."""
    scheme = tuple(a.shape[1] for a in lam)
    p = len(scheme)
    out = np.zeros(scheme)
    for l in range(nu.size):
        if nu[l] == 0:
            continue
        term = np.full(scheme, nu[l])
        for g in range(psi.shape[0]):
            members = np.flatnonzero(s == g)
            if members.size == 0:
                continue
            block = psi[g, l].copy()
            for j in members:
                block = block[..., None] * lam[j].reshape(lam[j].shape[:1] + (1,) * (block.ndim - 1) + (-1,))
            block = block.sum(axis=0)
            term = term * block.reshape([scheme[j] if j in members else 1 for j in range(p)])
        out += term
    return out


# ---------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class Snapshot:
    iteration: int
    lam: tuple[np.ndarray, ...]
    s: np.ndarray
    xi: np.ndarray
    nu: np.ndarray
    psi: np.ndarray
    w_counts: np.ndarray
    beta: float
    delta: np.ndarray

    @classmethod
    def of(cls, iteration: int, state: CTuckerState) -> "Snapshot":
        return cls(
            iteration,
            tuple(a.copy() for a in state.lam),
            state.s.copy(),
            state.xi.copy(),
            state.nu,
            state.psi,
            np.bincount(state.w, minlength=state.k),
            state.beta,
            state.delta.copy(),
        )

    def pi(self) -> np.ndarray:
        return ctucker_tensor(self.lam, self.s, self.nu, self.psi)


@dataclass
class ChainTrace:
    scheme: tuple[int, ...]
    n: int
    seed: int
    n_burn: int
    n_iter: int
    thin: int
    snapshots: list[Snapshot] = field(default_factory=list)
    iteration: int = 0

    def __len__(self) -> int:
        return len(self.snapshots)

    @staticmethod
    def expected_length(n_burn: int, n_iter: int, thin: int) -> int:
        return (n_iter - n_burn) // thin


class CheckpointError(OSError):
    pass


def _save_checkpoint(path: str, payload: dict) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".ckpt-")
        with os.fdopen(fd, "wb") as fh:
            pickle.dump(payload, fh, protocol=pickle.HIGHEST_PROTOCOL)
        os.replace(tmp, path)
    except OSError as exc:
        raise CheckpointError(f"cannot write checkpoint {path}: {exc}") from exc


def load_checkpoint(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            payload = pickle.load(fh)
    except (OSError, pickle.UnpicklingError, EOFError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(f"checkpoint version {payload.get('version')} is not {CHECKPOINT_VERSION}")
    return payload


def run_chain(
    data: np.ndarray,
    scheme: Sequence[int],
    hyper: Hyperparameters,
    n_burn: int,
    n_iter: int,
    thin: int = 1,
    seed: int = 0,
    checkpoint: str | None = None,
    checkpoint_every: int = 1000,
    resume: bool = False,
    callback: Callable[[int, CTuckerState], None] | None = None,
) -> ChainTrace:
    """Run ``n_iter`` sweeps in total, keeping every ``thin``-th sweep after ``n_burn``.

    With ``checkpoint`` set, the state, generator state and trace are written
    every ``checkpoint_every`` sweeps and at the end. ``resume=True`` picks up
    from that file if it exists; the continued chain is identical to an
    uninterrupted one with the same seed.
    """
    scheme = tuple(int(d) for d in scheme)
    if not 0 <= n_burn <= n_iter:
        raise ValueError("need 0 <= n_burn <= n_iter")
    if thin < 1:
        raise ValueError("thin must be positive")
    data = _check_data(data, scheme)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    trace = ChainTrace(scheme, data.shape[0], seed, n_burn, n_iter, thin)
    state = None
    if resume and checkpoint and os.path.exists(checkpoint):
        payload = load_checkpoint(checkpoint)
        if payload["seed"] != seed or payload["hyper"] != hyper or tuple(payload["trace"].scheme) != scheme:
            raise CheckpointError("checkpoint was written by a different configuration")
        state = payload["state"]
        rng.bit_generator.state = payload["rng_state"]
        trace = payload["trace"]
        trace.n_iter = n_iter
    if state is None:
        state = init_state(data, scheme, hyper, rng)

    def persist():
        if checkpoint:
            _save_checkpoint(
                checkpoint,
                {
                    "version": CHECKPOINT_VERSION,
                    "seed": seed,
                    "hyper": hyper,
                    "iteration": trace.iteration,
                    "state": state,
                    "rng_state": rng.bit_generator.state,
                    "trace": trace,
                },
            )

    while trace.iteration < n_iter:
        state = gibbs_sweep(state, data, scheme, hyper, rng)
        trace.iteration += 1
        it = trace.iteration
        if it > n_burn and (it - n_burn) % thin == 0:
            trace.snapshots.append(Snapshot.of(it, state))
        if callback is not None:
            callback(it, state)
        if checkpoint and it % checkpoint_every == 0:
            persist()
    persist()
    return trace


# ---------------------------------------------------------------------------
# summaries


class ZeroMarginWarning(RuntimeWarning):
    pass


def _cramers_v_2d(joint: np.ndarray, warn: bool = True) -> float:
    rows, cols = joint.sum(axis=1), joint.sum(axis=0)
    keep_r, keep_c = rows > 0, cols > 0
    if warn and (not keep_r.all() or not keep_c.all()):
        warnings.warn("zero-mass marginal level dropped", ZeroMarginWarning, stacklevel=3)
    joint = joint[np.ix_(keep_r, keep_c)]
    rows, cols = rows[keep_r], cols[keep_c]
    q = min(rows.size, cols.size) - 1
    if q <= 0:
        return 0.0
    expected = np.outer(rows, cols)
    chi2 = float((((joint - expected) ** 2) / expected).sum() / joint.sum())
    return float(np.sqrt(min(max(chi2 / q, 0.0), 1.0)))


def cramers_v(pi: np.ndarray, j: int, jj: int) -> float:
    """Population Cramer's V of variables ``j`` and ``jj`` under ``pi``."""
    if j == jj:
        raise ValueError("Cramer's V needs two distinct variables")
    pi = np.asarray(pi, dtype=float)
    other = tuple(a for a in range(pi.ndim) if a not in (j, jj))
    joint = pi.sum(axis=other)
    if j > jj:
        joint = joint.T
    return _cramers_v_2d(joint)


def cramers_v_matrix(pi: np.ndarray) -> np.ndarray:
    p = np.asarray(pi).ndim
    out = np.zeros((p, p))
    for a in range(p):
        for b in range(a + 1, p):
            out[a, b] = out[b, a] = cramers_v(pi, a, b)
    return out


def canonical_groups(s: Sequence[int]) -> tuple[int, ...]:
    """Relabel groups in order of their smallest member."""
    seen: dict[int, int] = {}
    return tuple(seen.setdefault(int(g), len(seen)) for g in s)


def occupancy_threshold(n: int) -> int:
    return max(2, int(np.ceil(0.005 * n)))


@dataclass(frozen=True)
class PosteriorSummary:
    core_rank_prob: float
    group_configs: list[tuple[tuple[int, ...], float]]
    occupied_groups: dict[int, float]
    cramers_v_mean: np.ndarray
    cramers_v_exceed: np.ndarray
    theta_keys: list[Key]
    theta_samples: np.ndarray  # (n_snapshots, n_keys)
    pi_mean: np.ndarray

    def theta_interval(self, level: float = 0.95) -> tuple[np.ndarray, np.ndarray]:
        tail = 50.0 * (1.0 - level)
        return (
            np.percentile(self.theta_samples, tail, axis=0),
            np.percentile(self.theta_samples, 100.0 - tail, axis=0),
        )

    @property
    def theta_mean(self) -> np.ndarray:
        return self.theta_samples.mean(axis=0)


def posterior_summary(
    trace: ChainTrace,
    data: np.ndarray | None = None,
    occupancy_min: int | None = None,
    top: int = 10,
    max_order: int = 2,
    v_cut: float = 0.1,
) -> PosteriorSummary:
    """Posterior functionals of a finished trace.

    ``core_rank_prob`` is the fraction of snapshots with more than one core
    class held by at least ``occupancy_min`` observations (default
    ``max(2, 0.005 n)``). Group configurations are counted after relabeling
    groups by their smallest member. Cramer's V and log-linear coefficients
    (orders 1 to ``max_order``) are computed from each snapshot's tensor.
    """
    if not trace.snapshots:
        raise ValueError("posterior summary needs a nonempty trace")
    if data is not None:
        data = np.asarray(data)
        if data.ndim != 2 or data.shape[1] != len(trace.scheme):
            raise SchemeMismatch("data and trace disagree on the number of variables")
        if data.shape[0] != trace.n:
            raise SchemeMismatch("data and trace disagree on the number of observations")
    n = trace.n
    occupancy_min = occupancy_threshold(n) if occupancy_min is None else occupancy_min
    S = len(trace.snapshots)
    keys = all_keys(trace.scheme, max_order)
    multi = 0
    configs: Counter = Counter()
    occupied: Counter = Counter()
    p = len(trace.scheme)
    v_sum = np.zeros((p, p))
    v_hits = np.zeros((p, p))
    theta = np.empty((S, len(keys)))
    pi_sum = np.zeros(trace.scheme)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroMarginWarning)
        for i, snap in enumerate(trace.snapshots):
            multi += int((snap.w_counts >= occupancy_min).sum() > 1)
            labels = canonical_groups(snap.s)
            configs[labels] += 1
            occupied[len(set(labels))] += 1
            pi = snap.pi()
            pi_sum += pi
            v = cramers_v_matrix(pi)
            v_sum += v
            v_hits += v > v_cut
            theta[i] = coefficient_vector(theta_from_tensor(pi), keys)
    ranked = sorted(configs.items(), key=lambda kv: (-kv[1], kv[0]))[:top]
    np.fill_diagonal(v_hits, 0)
    return PosteriorSummary(
        core_rank_prob=multi / S,
        group_configs=[(cfg, c / S) for cfg, c in ranked],
        occupied_groups={g: c / S for g, c in sorted(occupied.items())},
        cramers_v_mean=v_sum / S,
        cramers_v_exceed=v_hits / S,
        theta_keys=keys,
        theta_samples=theta,
        pi_mean=pi_sum / S,
    )
