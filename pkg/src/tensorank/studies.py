"""Monte Carlo studies: priors induced on log-linear terms, simulated data, coverage."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from . import catalog
from ._util import dirichlet, stick_weights
from .ctucker import (
    ChainTrace,
    Hyperparameters,
    PosteriorSummary,
    arm_concentrations,
    cramers_v_matrix,
    posterior_summary,
    run_chain,
)
from .loglinear import (
    MAX_CELLS,
    CapExceeded,
    Key,
    LogLinearModel,
    _mobius_log,
    all_keys,
    coefficient_vector,
    random_model_from_graph,
    tensor_from_loglinear,
)

# ---------------------------------------------------------------------------
# induced prior


@dataclass(frozen=True)
class PriorStudyConfig:
    p: int = 3
    d: int = 20
    m: int = 5
    schedule: Literal["flat", "decreasing"] = "decreasing"
    n_draws: int = 10_000

    def __post_init__(self):
        if self.n_draws < 1:
            raise ValueError("n_draws must be at least 1")
        if self.p < 1 or self.d < 2 or self.m < 1:
            raise ValueError("need p >= 1, d >= 2 and m >= 1")


@dataclass(frozen=True)
class PriorStudyResult:
    config: PriorStudyConfig
    representative_keys: tuple[Key, ...]
    representative: np.ndarray  # (n_draws, n_orders)
    l1: np.ndarray  # (n_draws, p), column r-1 holds the L1 norm of order r terms

    def l1_of_order(self, r: int) -> np.ndarray:
        return self.l1[:, r - 1]


def representative_keys(p: int, max_order: int = 3) -> tuple[Key, ...]:
    """Lexicographically first key of each order: variables ``0..r-1`` at level 1."""
    return tuple((tuple(range(r)), (1,) * r) for r in range(1, min(p, max_order) + 1))


def draw_prior_parafac(p: int, d: int, m: int, schedule, rng: np.random.Generator) -> np.ndarray:
    """One tensor from the PARAFAC prior: stick weights with unit concentration, Dirichlet arms."""
    fractions = rng.beta(1.0, 1.0, size=m)
    fractions[-1] = 1.0
    weights = stick_weights(fractions)
    a = arm_concentrations(schedule, m, d)
    out = np.zeros((d,) * p)
    arms = [dirichlet(np.broadcast_to(a[:, None], (m, d)), rng) for _ in range(p)]
    for h in range(m):
        term = np.full((d,) * p, weights[h])
        for j in range(p):
            shape = [1] * p
            shape[j] = d
            term = term * arms[j][h].reshape(shape)
        out += term
    return out


def induced_prior_study(cfg: PriorStudyConfig, rng: np.random.Generator) -> PriorStudyResult:
    """Sample tensors from the prior and record the log-linear terms they imply."""
    if cfg.d**cfg.p > MAX_CELLS:
        raise CapExceeded(f"{cfg.d}**{cfg.p} cells exceed the storage cap")
    shape = (cfg.d,) * cfg.p
    order = np.zeros(shape, dtype=int)
    for j in range(cfg.p):
        idx = [1] * cfg.p
        idx[j] = cfg.d
        order = order + (np.arange(cfg.d) > 0).reshape(idx)
    keys = representative_keys(cfg.p)
    cells = []
    for E, lv in keys:
        cell = [0] * cfg.p
        for j, c in zip(E, lv):
            cell[j] = c
        cells.append(tuple(cell))
    rep = np.empty((cfg.n_draws, len(keys)))
    l1 = np.empty((cfg.n_draws, cfg.p))
    for t in range(cfg.n_draws):
        pi = draw_prior_parafac(cfg.p, cfg.d, cfg.m, cfg.schedule, rng)
        coef = _mobius_log(np.log(pi))
        rep[t] = [coef[c] for c in cells]
        mags = np.abs(coef)
        l1[t] = [mags[order == r].sum() for r in range(1, cfg.p + 1)]
    return PriorStudyResult(cfg, keys, rep, l1)


def histogram(values: np.ndarray, bins: int | Sequence[float] = 50) -> tuple[np.ndarray, np.ndarray]:
    counts, edges = np.histogram(np.asarray(values, dtype=float), bins=bins)
    return edges, counts


def write_histogram_csv(path: str, columns: dict[str, np.ndarray], bins: int = 50) -> None:
    """One block of rows per named series: ``series,bin_lo,bin_hi,count``."""
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["series", "bin_lo", "bin_hi", "count"])
        for name, values in columns.items():
            edges, counts = histogram(values, bins)
            for lo, hi, c in zip(edges[:-1], edges[1:], counts):
                out.writerow([name, repr(float(lo)), repr(float(hi)), int(c)])


# ---------------------------------------------------------------------------
# simulated data


@dataclass(frozen=True)
class SimulatedData:
    observations: np.ndarray  # (n, p), 0-based levels
    model: LogLinearModel
    pi: np.ndarray


def sample_cells(pi: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` iid cells drawn from ``pi``, returned as an ``(n, p)`` array of levels."""
    pi = np.asarray(pi, dtype=float)
    if n == 0:
        return np.zeros((0, pi.ndim), dtype=np.int64)
    flat = rng.choice(pi.size, size=n, p=pi.ravel() / pi.sum())
    return np.stack(np.unravel_index(flat, pi.shape), axis=1).astype(np.int64)


def simulate_dataset(
    edges: Iterable[tuple[int, int]],
    n: int,
    sigma2: float,
    rng: np.random.Generator,
    scheme: Sequence[int] | None = None,
    p: int | None = None,
) -> SimulatedData:
    """Graph-supported model with iid N(0, sigma2) terms, its tensor and ``n`` draws.

    The scheme defaults to binary variables, ``p`` to one more than the
    largest vertex.
    """
    edges = list(edges)
    if scheme is None:
        if p is None:
            p = 1 + max(max(e) for e in edges)
        scheme = (2,) * p
    if n < 0:
        raise ValueError("n must be nonnegative")
    model = random_model_from_graph(scheme, edges, sigma2, rng)
    pi = tensor_from_loglinear(model)
    return SimulatedData(sample_cells(pi, n, rng), model, pi)


def cell_counts(observations: np.ndarray, scheme: Sequence[int]) -> np.ndarray:
    flat = np.ravel_multi_index(tuple(np.asarray(observations).T), tuple(scheme))
    return np.bincount(flat, minlength=int(np.prod(scheme))).reshape(tuple(scheme))


# ---------------------------------------------------------------------------
# coverage


@dataclass(frozen=True)
class CoverageReport:
    keys: list[Key]
    lower: np.ndarray
    upper: np.ndarray
    truth: np.ndarray
    covered: np.ndarray
    coverage: float


def coverage_report(
    source: PosteriorSummary | ChainTrace,
    true_model: LogLinearModel,
    level: float = 0.95,
    order: int = 2,
) -> CoverageReport:
    """Equal-tailed intervals of the order-``order`` terms and whether they hold the truth."""
    summary = source if isinstance(source, PosteriorSummary) else posterior_summary(source, max_order=order)
    if summary.theta_samples.shape[0] == 0:
        raise ValueError("coverage needs at least one posterior sample")
    idx = [i for i, (E, _) in enumerate(summary.theta_keys) if len(E) == order]
    if not idx:
        raise ValueError(f"posterior summary holds no order-{order} terms")
    keys = [summary.theta_keys[i] for i in idx]
    if any(c >= true_model.scheme[j] for E, lv in keys for j, c in zip(E, lv)):
        raise ValueError("truth and trace disagree on the scheme")
    lower, upper = summary.theta_interval(level)
    lower, upper = lower[idx], upper[idx]
    truth = coefficient_vector(true_model, keys)
    covered = (lower <= truth) & (truth <= upper)
    return CoverageReport(keys, lower, upper, truth, covered, float(covered.mean()))


def write_coverage_csv(path: str, report: CoverageReport) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["variables", "levels", "truth", "lower", "upper", "covered"])
        for key, t, lo, hi, c in zip(report.keys, report.truth, report.lower, report.upper, report.covered):
            E, lv = key
            out.writerow(
                ["-".join(str(j + 1) for j in E), "-".join(str(c + 1) for c in lv), repr(float(t)), repr(float(lo)), repr(float(hi)), int(c)]
            )


# ---------------------------------------------------------------------------
# the two simulation experiments


@dataclass(frozen=True)
class SimulationRun:
    data: SimulatedData
    hyper: Hyperparameters
    trace: ChainTrace
    summary: PosteriorSummary
    coverage: CoverageReport
    true_cramers_v: np.ndarray


DESK_SCHEDULE = (2000, 7000, 5)
FULL_SCHEDULE = (10_000, 25_000, 10)


def run_simulation(
    graph: str,
    n: int,
    sigma2: float,
    hyper: Hyperparameters,
    seed: int,
    schedule: tuple[int, int, int] = DESK_SCHEDULE,
) -> SimulationRun:
    """Simulate from a named graph, fit the c-Tucker sampler and summarize.

    The data and the chain use independent children of ``seed``.
    """
    p, edges = catalog.GRAPHS[graph]
    data_seed, chain_seed = np.random.SeedSequence(seed).spawn(2)
    sim = simulate_dataset(edges, n, sigma2, np.random.default_rng(data_seed), p=p)
    n_burn, n_iter, thin = schedule
    chain_int = int(chain_seed.generate_state(1)[0])
    trace = run_chain(sim.observations, sim.model.scheme, hyper, n_burn, n_iter, thin, seed=chain_int)
    summary = posterior_summary(trace, sim.observations)
    cover = coverage_report(summary, sim.model)
    return SimulationRun(sim, hyper, trace, summary, cover, cramers_v_matrix(sim.pi))


def simulation_one(seed: int = 1, schedule=DESK_SCHEDULE, m: int = 8) -> SimulationRun:
    """Two cliques {1-4} and {5-7}, fixed groups, N(0, 9) terms, n = 1000."""
    hyper = Hyperparameters(m=m, k=2, groups=(0, 0, 0, 0, 1, 1, 1))
    return run_simulation("two-cliques", 1000, 9.0, hyper, seed, schedule)


def simulation_two(seed: int = 1, schedule=DESK_SCHEDULE, m: int = 8) -> SimulationRun:
    """The eight-variable simulation graph, k = 3 learned groups, N(0, 3) terms, n = 2000."""
    hyper = Hyperparameters(m=m, k=3)
    return run_simulation("simulation", 2000, 3.0, hyper, seed, schedule)


def zero_two_way_keys(model: LogLinearModel) -> list[Key]:
    return [key for key in all_keys(model.scheme, 2) if len(key[0]) == 2 and key not in model.theta]
