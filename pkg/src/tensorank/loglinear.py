"""Corner-parametrized log-linear models over p categorical variables.

Variables and levels are 0-based throughout the library: variable ``j`` takes
levels ``0 .. d_j - 1`` and level 0 is the corner (baseline) level, so an
interaction coefficient is only representable when none of its levels is 0.
The text file formats in :mod:`tensorank.fileio` use 1-based indices.

An interaction key is a pair ``(E, levels)`` of two equal-length tuples: the
sorted variable subset and one level per member of the subset.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

import networkx as nx
import numpy as np
from scipy.special import logsumexp

Key = tuple[tuple[int, ...], tuple[int, ...]]

MAX_CELLS = 2**24


class ModelError(ValueError):
    """Structurally invalid model, scheme or key."""


class CapExceeded(RuntimeError):
    """A size cap (cell count, search nodes) was exceeded."""


class NotWeaklyHierarchical(ValueError):
    """Raised by rank bounds that require a weakly hierarchical model."""


def check_scheme(levels: Iterable[int]) -> tuple[int, ...]:
    levels = tuple(int(d) for d in levels)
    if len(levels) < 1:
        raise ModelError("a scheme needs at least one variable")
    if any(d < 2 for d in levels):
        raise ModelError(f"every variable needs at least 2 levels, got {levels}")
    return levels


def n_cells(scheme: tuple[int, ...]) -> int:
    return int(np.prod(scheme, dtype=object))


def check_cells(scheme: tuple[int, ...], cap: int = MAX_CELLS) -> None:
    if n_cells(scheme) > cap:
        raise CapExceeded(f"scheme {scheme} has {n_cells(scheme)} cells, cap is {cap}")


def canonical_key(variables: Iterable[int], levels: Iterable[int]) -> Key:
    """Sort a key by variable, carrying levels along."""
    pairs = sorted(zip((int(v) for v in variables), (int(c) for c in levels)))
    E = tuple(v for v, _ in pairs)
    lv = tuple(c for _, c in pairs)
    if len(set(E)) != len(E):
        raise ModelError(f"repeated variable in key {E}")
    return E, lv


def all_keys(scheme: tuple[int, ...], max_order: int | None = None) -> list[Key]:
    """Every free (corner-valid) key, ordered by interaction order then lexicographically."""
    p = len(scheme)
    top = p if max_order is None else min(p, max_order)
    keys = []
    for r in range(1, top + 1):
        for E in itertools.combinations(range(p), r):
            for lv in itertools.product(*(range(1, scheme[j]) for j in E)):
                keys.append((E, lv))
    return keys


def sub_keys(key: Key, min_size: int = 1) -> Iterator[Key]:
    """Proper nonempty sub-keys of ``key`` (matching levels on the subset)."""
    E, lv = key
    for r in range(min_size, len(E)):
        for idx in itertools.combinations(range(len(E)), r):
            yield tuple(E[i] for i in idx), tuple(lv[i] for i in idx)


@dataclass(frozen=True)
class LogLinearModel:
    """Log-linear model ``log pi_i = theta0 + sum_E theta_E(i_E)``.

    ``theta`` maps interaction keys to nonzero coefficients; an absent key is a
    zero coefficient. Zero values passed in are dropped.
    """

    scheme: tuple[int, ...]
    theta: Mapping[Key, float] = field(default_factory=dict)
    theta0: float = 0.0

    def __post_init__(self):
        scheme = check_scheme(self.scheme)
        clean: dict[Key, float] = {}
        for (E, lv), value in dict(self.theta).items():
            if len(E) != len(lv) or len(E) == 0:
                raise ModelError(f"malformed key {(E, lv)}")
            key = canonical_key(E, lv)
            for j, c in zip(*key):
                if not 0 <= j < len(scheme):
                    raise ModelError(f"variable {j} outside scheme of {len(scheme)} variables")
                if not 0 <= c < scheme[j]:
                    raise ModelError(f"level {c} outside range of variable {j}")
                if c == 0:
                    raise ModelError(f"key {key} violates the corner constraint")
            if key in clean:
                raise ModelError(f"duplicate key {key}")
            value = float(value)
            if value != 0.0:
                clean[key] = value
        object.__setattr__(self, "scheme", scheme)
        object.__setattr__(self, "theta", clean)
        object.__setattr__(self, "theta0", float(self.theta0))

    @property
    def p(self) -> int:
        return len(self.scheme)

    def __getitem__(self, key: Key) -> float:
        return self.theta.get(canonical_key(*key), 0.0)

    def keys_of_order(self, order: int) -> list[Key]:
        return sorted(k for k in self.theta if len(k[0]) == order)

    def with_theta0(self, theta0: float) -> "LogLinearModel":
        return LogLinearModel(self.scheme, self.theta, theta0)

    def normalized(self) -> "LogLinearModel":
        """Copy with ``theta0`` set so the cell probabilities sum to one."""
        return self.with_theta0(normalizing_constant(self))


# ---------------------------------------------------------------------------
# structural checks


def is_weakly_hierarchical(model: LogLinearModel, ignore_main_effects: bool = False) -> bool:
    """Zero coefficients propagate to every super-key with matching levels.

    Equivalently every proper sub-key of a stored key is stored. With
    ``ignore_main_effects`` the order-one sub-keys are not required.
    """
    min_size = 2 if ignore_main_effects else 1
    for key in model.theta:
        for sub in sub_keys(key, min_size):
            if sub not in model.theta:
                return False
    return True


def is_hierarchical(model: LogLinearModel, ignore_main_effects: bool = False) -> bool:
    """The support is generated by a family of variable subsets.

    Every present subset carries a nonzero coefficient at all of its level
    combinations, and a fully-absent subset has fully-absent supersets.
    """
    present: dict[tuple[int, ...], int] = {}
    for E, _ in model.theta:
        present[E] = present.get(E, 0) + 1
    min_size = 2 if ignore_main_effects else 1
    for E, count in present.items():
        if len(E) >= min_size and count != math.prod(model.scheme[j] - 1 for j in E):
            return False
    for E in present:
        for r in range(min_size, len(E)):
            for F in itertools.combinations(E, r):
                if F not in present:
                    return False
    return True


@dataclass(frozen=True)
class SupportSummary:
    """Interaction support of a model.

    ``C_theta`` holds every nonzero key of order >= 2, ``C_theta2`` the
    two-way subset, ``C_j[j]`` the levels of variable ``j`` that interact with
    another variable, and ``U`` the variables with no interacting level.
    """

    scheme: tuple[int, ...]
    C_theta: frozenset
    C_theta2: frozenset
    C_j: tuple[frozenset, ...]
    U: frozenset

    @property
    def V_star(self) -> tuple[int, ...]:
        return tuple(j for j in range(len(self.scheme)) if j not in self.U)


def support_summary(model: LogLinearModel) -> SupportSummary:
    C_theta = frozenset(k for k in model.theta if len(k[0]) >= 2)
    C_theta2 = frozenset(k for k in C_theta if len(k[0]) == 2)
    source = C_theta2 if is_weakly_hierarchical(model, ignore_main_effects=True) else C_theta
    levels: list[set[int]] = [set() for _ in model.scheme]
    for E, lv in source:
        for j, c in zip(E, lv):
            levels[j].add(c)
    C_j = tuple(frozenset(s) for s in levels)
    U = frozenset(j for j, s in enumerate(C_j) if not s)
    return SupportSummary(model.scheme, C_theta, C_theta2, C_j, U)


# ---------------------------------------------------------------------------
# log-linear <-> tensor


def log_tensor(model: LogLinearModel, cap: int = MAX_CELLS) -> np.ndarray:
    """Unnormalized log cell probabilities ``theta0 + sum_E theta_E(i_E)``."""
    check_cells(model.scheme, cap)
    out = np.full(model.scheme, model.theta0, dtype=float)
    for (E, lv), value in model.theta.items():
        index: list[object] = [slice(None)] * model.p
        for j, c in zip(E, lv):
            index[j] = c
        out[tuple(index)] += value
    return out


def normalizing_constant(model: LogLinearModel) -> float:
    """The ``theta0`` that makes the cell probabilities sum to one."""
    logt = log_tensor(model.with_theta0(0.0))
    return float(-logsumexp(logt))


def tensor_from_loglinear(model: LogLinearModel, normalize: bool = True) -> np.ndarray:
    """Cell probabilities of ``model``.

    With ``normalize`` the stored ``theta0`` is ignored and replaced by the
    normalizing constant (see :func:`normalizing_constant` for its value).
    """
    if normalize:
        model = model.normalized()
    logt = log_tensor(model)
    with np.errstate(over="ignore"):
        out = np.exp(logt)
    if not np.all(np.isfinite(out)):
        raise OverflowError("exp overflow: coefficients too large for this scheme")
    return out


def theta_from_tensor(pi: np.ndarray, prune_below: float = 0.0) -> LogLinearModel:
    """Invert a strictly positive tensor to its corner-parametrized coefficients.

    Inclusion-exclusion over the corner cells, done as one finite-difference
    pass per axis against level 0. Coefficients with ``|theta| <= prune_below``
    are dropped; exact zeros are always dropped.
    """
    pi = np.asarray(pi, dtype=float)
    if np.any(~(pi > 0)):
        raise ValueError("theta_from_tensor needs strictly positive entries")
    scheme = check_scheme(pi.shape)
    coef = _mobius_log(np.log(pi))
    theta = {}
    nz = np.argwhere(np.abs(coef) > prune_below)
    for cell in nz:
        cell = tuple(int(c) for c in cell)
        E = tuple(j for j, c in enumerate(cell) if c)
        if not E:
            continue
        theta[(E, tuple(cell[j] for j in E))] = float(coef[cell])
    return LogLinearModel(scheme, theta, float(coef[(0,) * len(scheme)]))


def _mobius_log(logpi: np.ndarray) -> np.ndarray:
    coef = logpi.copy()
    for axis in range(coef.ndim):
        base = np.take(coef, [0], axis=axis)
        index: list[object] = [slice(None)] * coef.ndim
        index[axis] = slice(1, None)
        coef[tuple(index)] -= base
    return coef


def coefficient_array(model: LogLinearModel) -> np.ndarray:
    """Dense array whose cell ``i`` holds ``theta_E(i_E)`` for ``E = supp(i)``."""
    out = np.zeros(model.scheme)
    out[(0,) * model.p] = model.theta0
    for (E, lv), value in model.theta.items():
        cell = [0] * model.p
        for j, c in zip(E, lv):
            cell[j] = c
        out[tuple(cell)] = value
    return out


def coefficient_vector(model: LogLinearModel, keys: list[Key]) -> np.ndarray:
    return np.array([model.theta.get(k, 0.0) for k in keys])


# ---------------------------------------------------------------------------
# graph generated models


def clique_support(scheme: tuple[int, ...], edges: Iterable[tuple[int, int]]) -> list[Key]:
    """Keys of the hierarchical model generated by the cliques of a graph."""
    p = len(scheme)
    g = nx.Graph()
    g.add_nodes_from(range(p))
    for a, b in edges:
        if a == b:
            raise ModelError(f"self loop on variable {a}")
        if not (0 <= a < p and 0 <= b < p):
            raise ModelError(f"edge {(a, b)} outside scheme")
        g.add_edge(a, b)
    subsets = set()
    for clique in nx.find_cliques(g):
        clique = sorted(clique)
        for r in range(1, len(clique) + 1):
            subsets.update(itertools.combinations(clique, r))
    keys = []
    for E in sorted(subsets, key=lambda E: (len(E), E)):
        for lv in itertools.product(*(range(1, scheme[j]) for j in E)):
            keys.append((E, lv))
    return keys


def random_model_from_graph(
    scheme: Iterable[int],
    edges: Iterable[tuple[int, int]],
    sigma2: float,
    rng: np.random.Generator,
) -> LogLinearModel:
    """Hierarchical model on the graph's cliques with iid N(0, sigma2) coefficients."""
    scheme = check_scheme(scheme)
    keys = clique_support(scheme, edges)
    values = rng.normal(0.0, np.sqrt(sigma2), size=len(keys))
    return LogLinearModel(scheme, dict(zip(keys, values))).normalized()


def random_weakly_hierarchical(
    scheme: Iterable[int],
    rng: np.random.Generator,
    density: float = 0.5,
    scale: float = 1.0,
) -> LogLinearModel:
    """Random weakly hierarchical model.

    Keys are visited by increasing order; a key is kept with probability
    ``density`` only when all its proper sub-keys were kept, which is exactly
    the downward closure the definition asks for. Main effects are always kept.
    """
    scheme = check_scheme(scheme)
    kept: dict[Key, float] = {}
    for key in all_keys(scheme):
        if len(key[0]) == 1:
            kept[key] = 0.0
            continue
        if all(sub in kept for sub in sub_keys(key)) and rng.random() < density:
            kept[key] = 0.0
    values = rng.normal(0.0, scale, size=len(kept))
    # a zero draw would silently drop a key and break the closure
    values[values == 0.0] = scale
    return LogLinearModel(scheme, dict(zip(kept, values))).normalized()


def saturated_model(scheme: Iterable[int], rng: np.random.Generator, scale: float = 1.0) -> LogLinearModel:
    scheme = check_scheme(scheme)
    keys = all_keys(scheme)
    values = rng.normal(0.0, scale, size=len(keys))
    values[values == 0.0] = scale
    return LogLinearModel(scheme, dict(zip(keys, values))).normalized()
