"""Named models and graphs used in the worked examples and simulations.

Every model builder draws its nonzero coefficients from ``rng`` with magnitude
bounded away from zero, and by default adds a main effect for every level that
takes part in an interaction so the result is weakly hierarchical.
Indices are 0-based: "level 2" of the usual 1-based notation is level 1 here.
"""

from __future__ import annotations

import numpy as np

from .loglinear import Key, LogLinearModel, canonical_key, check_scheme


def _draw(rng: np.random.Generator, size: int, low: float = 0.5, high: float = 1.5) -> np.ndarray:
    mag = rng.uniform(low, high, size=size)
    sign = rng.choice([-1.0, 1.0], size=size)
    return mag * sign


def _build(scheme, keys, rng, main_effects, three_way=()) -> LogLinearModel:
    keys = list(dict.fromkeys(canonical_key(*k) for k in keys))
    keys += [canonical_key(*k) for k in three_way if canonical_key(*k) not in keys]
    if main_effects:
        mains = sorted({((j,), (c,)) for E, lv in keys for j, c in zip(E, lv)})
        keys = mains + keys
    values = _draw(rng, len(keys))
    return LogLinearModel(check_scheme(scheme), dict(zip(keys, values))).normalized()


def level_two_model(d: int = 4, rng: np.random.Generator | None = None) -> LogLinearModel:
    """Three variables where exactly the all-level-2 interactions are nonzero."""
    rng = rng or np.random.default_rng(0)
    keys: list[Key] = [
        ((0,), (1,)), ((1,), (1,)), ((2,), (1,)),
        ((0, 1), (1, 1)), ((0, 2), (1, 1)), ((1, 2), (1, 1)),
        ((0, 1, 2), (1, 1, 1)),
    ]
    return _build((d, d, d), keys, rng, main_effects=False)


def cross_model(d: int, rng: np.random.Generator, main_effects: bool = True) -> LogLinearModel:
    """Two variables; level 2 of each interacts with every non-corner level of the other."""
    keys = [((0, 1), (1, c)) for c in range(1, d)] + [((0, 1), (c, 1)) for c in range(1, d)]
    return _build((d, d), keys, rng, main_effects)


def triangle_model(d: int, rng: np.random.Generator, main_effects: bool = True) -> LogLinearModel:
    """Three variables with structured interactions on pairs (1,2), (2,3), (1,3).

    Level 2 of variable 1 with every level of variable 2, level 2 of variable 2
    with every level of variable 3, and level 3 of variable 3 with every level
    of variable 1. The last family needs ``d >= 3``.
    """
    keys = [((0, 1), (1, c)) for c in range(1, d)]
    keys += [((1, 2), (1, c)) for c in range(1, d)]
    if d >= 3:
        keys += [((0, 2), (c, 2)) for c in range(1, d)]
    return _build((d, d, d), keys, rng, main_effects)


def five_variable_model(d: int, rng: np.random.Generator, main_effects: bool = True) -> LogLinearModel:
    """Five-variable example with two nonzero three-way interactions (needs ``d >= 4``)."""
    if d < 4:
        raise ValueError("the five-variable example uses level 4 and needs d >= 4")
    rows = range(1, d)
    keys: list[Key] = []
    for a, b in [(0, 1), (1, 2), (2, 3), (3, 4), (1, 3), (0, 3), (1, 4), (0, 4)]:
        keys += [((a, b), (1, c)) for c in rows]
    keys += [((0, 4), (c, 1)) for c in rows]
    three = [((0, 1, 3), (1, 1, 3)), ((0, 1, 4), (1, 1, 3))]
    return _build((d,) * 5, keys, rng, main_effects, three_way=three)


# graphs on 0-based variables

STAR_GRAPH = [(j, 6) for j in range(6)]
MARGINAL_INDEPENDENCE_GRAPH = [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (1, 3)]
TWO_CLIQUES_GRAPH = MARGINAL_INDEPENDENCE_GRAPH + [(4, 5), (5, 6), (6, 4)]
ONE_SEPARATOR_GRAPH = MARGINAL_INDEPENDENCE_GRAPH + [(3, 4), (4, 5), (5, 6), (6, 4)]
SIMULATION_GRAPH = MARGINAL_INDEPENDENCE_GRAPH + [
    (3, 4), (3, 5), (4, 5), (4, 6), (4, 7), (5, 6), (5, 7), (6, 7),
]

GRAPHS = {
    "star": (7, STAR_GRAPH),
    "marginal-independence": (7, MARGINAL_INDEPENDENCE_GRAPH),
    "two-cliques": (7, TWO_CLIQUES_GRAPH),
    "one-separator": (7, ONE_SEPARATOR_GRAPH),
    "simulation": (8, SIMULATION_GRAPH),
}
