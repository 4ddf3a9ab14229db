"""Command line entry point: ``tensorank <subcommand> [flags]``.

Every run writes its outputs plus one ``manifest.txt`` (key=value lines) into
``--out``. Failures print a single ``error: kind=<kind>; message=<text>`` line
and exit with 2 (usage), 3 (input), 4 (cap exceeded) or 5 (numeric failure).

All randomness derives from ``--seed``: sub-seed ``i`` is
``SeedSequence(seed, spawn_key=(i,))``.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__, catalog, fileio
from ._util import spawn_seeds
from .ctucker import Hyperparameters, posterior_summary, run_chain
from .loglinear import (
    CapExceeded,
    ModelError,
    NotWeaklyHierarchical,
    tensor_from_loglinear,
    theta_from_tensor,
)
from .rank import (
    build_partition,
    expected_merged_size,
    merge_partition,
    oracle_nonneg_rank,
    rank_bound_report,
    verify_conditional_independence,
    witness_expansion,
)
from .rank.report import format_H
from .studies import (
    FULL_SCHEDULE,
    PriorStudyConfig,
    coverage_report,
    induced_prior_study,
    simulate_dataset,
    write_coverage_csv,
    write_histogram_csv,
)
from .tensors import SchemeMismatch, eval_ctucker, eval_parafac

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_CAP, EXIT_NUMERIC = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(kind: str, message: str) -> str:
    return f"error: kind={kind}; message={' '.join(str(message).split())}"


# ---------------------------------------------------------------------------
# manifest


class Run:
    def __init__(self, args: argparse.Namespace, argv: Sequence[str]):
        self.args = args
        self.argv = list(argv)
        self.out = args.out
        os.makedirs(self.out, exist_ok=True)
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []
        self.results: dict[str, object] = {}
        self.started = _now()

    def input(self, path: str) -> str:
        with open(path, "rb") as fh:
            self.inputs[path] = hashlib.sha256(fh.read()).hexdigest()
        return path

    def path(self, name: str) -> str:
        self.outputs.append(name)
        return os.path.join(self.out, name)

    def write_manifest(self) -> None:
        lines = [
            ("tool", "tensorank"),
            ("version", __version__),
            ("subcommand", self.args.command),
            ("argv", " ".join(self.argv)),
        ]
        for key, value in sorted(vars(self.args).items()):
            if key not in ("command", "handler"):
                lines.append((f"flag.{key}", value))
        for path, digest in sorted(self.inputs.items()):
            lines.append((f"input.{path}", f"sha256:{digest}"))
        for name in self.outputs:
            lines.append(("output", name))
        for key, value in self.results.items():
            lines.append((f"result.{key}", value))
        lines += [("started", self.started), ("finished", _now())]
        with open(os.path.join(self.out, "manifest.txt"), "w") as fh:
            for key, value in lines:
                fh.write(f"{key}={value}\n")


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _write_kv(path: str, items: dict) -> None:
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k}={v}\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_bound(run: Run) -> int:
    a = run.args
    model = fileio.read_model(run.input(a.model))
    report = rank_bound_report(model, ignore_main_effects=a.ignore_main_effects, search=a.search)
    rows = report.rows()
    with open(run.path("bounds.csv"), "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["bound_name", "value", "witness"])
        out.writerows(rows)
    width = max(len(r[0]) for r in rows)
    text = [f"{'bound'.ljust(width)}  {'value':>8}  witness"]
    text += [f"{name.ljust(width)}  {value:>8}  {witness}" for name, value, witness in rows]
    with open(run.path("bounds.txt"), "w") as fh:
        fh.write("\n".join(text) + "\n")
    print("\n".join(text))
    for name, value, _ in rows:
        run.results[name] = value
    return EXIT_OK


def _load_tensor(run: Run) -> np.ndarray:
    a = run.args
    if a.tensor:
        return fileio.read_tensor(run.input(a.tensor))
    return tensor_from_loglinear(fileio.read_model(run.input(a.model)))


def cmd_oracle(run: Run) -> int:
    a = run.args
    pi = _load_tensor(run)
    witness = None
    if a.witness:
        exp = fileio.read_expansion(run.input(a.witness))
        if not hasattr(exp, "weights"):
            raise ValueError("the oracle witness must be a PARAFAC expansion")
        witness = exp
    m_range = range(a.m_min, a.m_max + 1) if a.m_max else None
    res = oracle_nonneg_rank(
        pi, restarts=a.restarts, max_iters=a.max_iters, eps=a.eps, m_range=m_range,
        seed=int(spawn_seeds(a.seed, 1)[0].generate_state(1)[0]), witness=witness,
    )
    with open(run.path("oracle.csv"), "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["m", "residual"])
        for m, r in sorted(res.residuals.items()):
            out.writerow([m, repr(r)])
    summary = {
        "certified_lower": res.certified_lower,
        "heuristic_upper": res.heuristic_upper,
        "exact": res.exact,
        "witness_terms": res.witness_terms,
    }
    _write_kv(run.path("oracle.txt"), summary)
    run.results.update(summary)
    print(" ".join(f"{k}={v}" for k, v in summary.items()))
    return EXIT_OK


def parse_H(text: str, p: int) -> tuple[frozenset, ...]:
    """``2,2,3`` gives one level per variable; ``2+3,-,3`` lists several or none (``-``)."""
    items = text.split(",")
    if len(items) != p:
        raise ValueError(f"--H needs {p} comma separated entries, got {len(items)}")
    out = []
    for item in items:
        item = item.strip()
        if item in ("", "-"):
            out.append(frozenset())
            continue
        try:
            out.append(frozenset(int(c) - 1 for c in item.split("+")))
        except ValueError as exc:
            raise ValueError(f"bad --H entry {item!r}") from exc
    return tuple(out)


def cmd_verify(run: Run) -> int:
    a = run.args
    model = fileio.read_model(run.input(a.model))
    H = parse_H(a.H, model.p)
    for j, h in enumerate(H):
        if any(not 1 <= c < model.scheme[j] for c in h):
            raise ValueError(f"--H levels of variable {j + 1} must lie in 2..{model.scheme[j]}")
    pi = tensor_from_loglinear(model)
    part = build_partition(H, model.scheme)
    results = {"blocks_initial": len(part)}
    ci0 = verify_conditional_independence(pi, part, a.tol)
    results["ci_initial"] = "pass" if ci0.ok else "fail"
    results["ci_initial_worst"] = repr(ci0.worst)
    if a.merge:
        l = a.merge - 1
        if not 0 <= l < model.p:
            raise ValueError(f"--merge must lie in 1..{model.p}")
        free = [j for j in range(model.p) if j not in _interacting(model)]
        part = merge_partition(part, l, free)
        ci = verify_conditional_independence(pi, part, a.tol)
        results["blocks_merged"] = len(part)
        results["blocks_expected"] = expected_merged_size(H, l, model.scheme, free)
        results["ci_merged"] = "pass" if ci.ok else "fail"
        results["ci_merged_worst"] = repr(ci.worst)
    results["H"] = format_H(H)
    _write_kv(run.path("verify.txt"), results)
    run.results.update(results)
    print(" ".join(f"{k}={v}" for k, v in results.items()))
    return EXIT_OK


def _interacting(model) -> set[int]:
    return {j for E, _ in model.theta if len(E) >= 2 for j in E}


def cmd_transform(run: Run) -> int:
    a = run.args
    if a.to == "model":
        if not a.tensor:
            raise ValueError("--to model needs --tensor")
        pi = fileio.read_tensor(run.input(a.tensor))
        model = theta_from_tensor(pi / pi.sum(), prune_below=a.prune)
        fileio.write_model(run.path("model.txt"), model)
        return EXIT_OK
    if a.to == "tensor":
        if a.expansion:
            exp = fileio.read_expansion(run.input(a.expansion))
            pi = eval_parafac(exp) if hasattr(exp, "weights") else eval_ctucker(exp)
        elif a.model:
            pi = tensor_from_loglinear(fileio.read_model(run.input(a.model)))
        else:
            raise ValueError("--to tensor needs --model or --expansion")
        fileio.write_tensor(run.path("tensor.txt"), pi)
        return EXIT_OK
    if a.to == "expansion":
        if not a.model:
            raise ValueError("--to expansion needs --model")
        model = fileio.read_model(run.input(a.model))
        exp = witness_expansion(model)
        fileio.write_expansion(run.path("expansion.txt"), exp)
        run.results["terms"] = exp.n_terms
        return EXIT_OK
    raise ValueError(f"unknown target {a.to!r}")


def _graph(a) -> tuple[int, list[tuple[int, int]]]:
    given = [x for x in (a.graph, a.edges, a.graph_file) if x]
    if len(given) != 1:
        raise UsageError("give exactly one of --graph, --edges, --graph-file")
    if a.graph:
        if a.graph not in catalog.GRAPHS:
            raise ValueError(f"unknown graph {a.graph!r}; choose from {', '.join(catalog.GRAPHS)}")
        return catalog.GRAPHS[a.graph]
    if a.edges:
        edges = fileio.parse_edges(a.edges)
        return (a.p or 1 + max(max(e) for e in edges)), edges
    return fileio.read_graph(a.graph_file)


def _hyper(a, p: int) -> Hyperparameters:
    groups = None
    if a.groups != "learn":
        if not a.groups.startswith("fixed:"):
            raise UsageError("--groups takes learn or fixed:<labels>")
        try:
            groups = tuple(int(g) - 1 for g in a.groups[6:].split(","))
        except ValueError as exc:
            raise UsageError(f"bad group list {a.groups!r}") from exc
        if len(groups) != p:
            raise ValueError(f"--groups lists {len(groups)} labels for {p} variables")
    return Hyperparameters(m=a.m, k=a.k, arm_schedule=a.arm_schedule, groups=groups)


def _schedule(a) -> tuple[int, int, int]:
    return FULL_SCHEDULE if getattr(a, "long_schedule", False) else (a.burn, a.iters, a.thin)


def _fit_and_write(run: Run, data: np.ndarray, scheme, hyper, seed_index: int):
    a = run.args
    n_burn, n_iter, thin = _schedule(a)
    chain_seed = int(spawn_seeds(a.seed, seed_index + 1)[seed_index].generate_state(1)[0])
    ckpt = a.checkpoint if getattr(a, "checkpoint", None) else None
    trace = run_chain(
        data, scheme, hyper, n_burn, n_iter, thin, seed=chain_seed,
        checkpoint=ckpt, checkpoint_every=a.checkpoint_every, resume=a.resume,
    )
    summary = posterior_summary(trace, data)
    p = len(scheme)
    with open(run.path("cramers_v.csv"), "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["var_a", "var_b", "posterior_mean", "prob_exceeds_0.1"])
        for i in range(p):
            for j in range(i + 1, p):
                out.writerow([i + 1, j + 1, repr(summary.cramers_v_mean[i, j]), repr(summary.cramers_v_exceed[i, j])])
    with open(run.path("group_configs.csv"), "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["groups", "probability"])
        for cfg, prob in summary.group_configs:
            out.writerow([" ".join(str(g + 1) for g in cfg), repr(prob)])
    lower, upper = summary.theta_interval()
    with open(run.path("theta.csv"), "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["variables", "levels", "mean", "lower", "upper"])
        for key, mu, lo, hi in zip(summary.theta_keys, summary.theta_mean, lower, upper):
            E, lv = key
            out.writerow(["-".join(str(j + 1) for j in E), "-".join(str(c + 1) for c in lv), repr(mu), repr(lo), repr(hi)])
    results = {
        "snapshots": len(trace),
        "core_rank_prob": repr(summary.core_rank_prob),
        "chain_seed": chain_seed,
        **{f"occupied_groups_{g}": repr(v) for g, v in summary.occupied_groups.items()},
    }
    _write_kv(run.path("summary.txt"), results)
    run.results.update(results)
    print(" ".join(f"{k}={v}" for k, v in results.items()))
    return summary


def cmd_fit(run: Run) -> int:
    a = run.args
    scheme = tuple(int(d) for d in a.scheme.split(",")) if a.scheme else None
    data, _, scheme = fileio.read_data(run.input(a.data), scheme)
    if data.shape[0] == 0:
        raise ValueError("no observations in the data file")
    _fit_and_write(run, data, scheme, _hyper(a, len(scheme)), seed_index=0)
    return EXIT_OK


def cmd_simulate(run: Run) -> int:
    a = run.args
    p, edges = _graph(a)
    data_seed = spawn_seeds(a.seed, 2)[0]
    sim = simulate_dataset(edges, a.n, a.sigma2, np.random.default_rng(data_seed), scheme=(a.levels,) * p)
    fileio.write_data(run.path("data.csv"), sim.observations)
    fileio.write_model(run.path("model.txt"), sim.model)
    fileio.write_tensor(run.path("tensor.txt"), sim.pi)
    run.results["n"] = a.n
    if a.fit:
        if a.n == 0:
            raise ValueError("--fit needs n > 0")
        summary = _fit_and_write(run, sim.observations, sim.model.scheme, _hyper(a, p), seed_index=1)
        report = coverage_report(summary, sim.model)
        write_coverage_csv(run.path("coverage.csv"), report)
        run.results["coverage"] = repr(report.coverage)
        print(f"coverage={report.coverage!r}")
    return EXIT_OK


def cmd_prior_study(run: Run) -> int:
    a = run.args
    schedules = ["flat", "decreasing"] if a.schedule == "both" else [a.schedule]
    seeds = spawn_seeds(a.seed, len(schedules))
    for sched, ss in zip(schedules, seeds):
        cfg = PriorStudyConfig(p=a.p, d=a.d, m=a.m, schedule=sched, n_draws=a.draws)
        res = induced_prior_study(cfg, np.random.default_rng(ss))
        with open(run.path(f"draws_{sched}.csv"), "w", newline="") as fh:
            out = csv.writer(fh)
            rep_names = [f"term_order{len(E)}" for E, _ in res.representative_keys]
            out.writerow(rep_names + [f"l1_order{r}" for r in range(1, a.p + 1)])
            for rep, l1 in zip(res.representative, res.l1):
                out.writerow([repr(float(x)) for x in rep] + [repr(float(x)) for x in l1])
        cols = {f"term_order{len(E)}": res.representative[:, i] for i, (E, _) in enumerate(res.representative_keys)}
        cols.update({f"l1_order{r}": res.l1_of_order(r) for r in range(1, a.p + 1)})
        write_histogram_csv(run.path(f"hist_{sched}.csv"), cols, bins=a.bins)
        if a.p >= 2:
            run.results[f"median_l1_order2_{sched}"] = repr(float(np.median(res.l1_of_order(2))))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = _Parser(prog="tensorank", description="Rank bounds and collapsed Tucker models for contingency tables.")
    parser.add_argument("--version", action="version", version=f"tensorank {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, seed=False):
        p.add_argument("--out", default=".", help="output directory")
        if seed:
            p.add_argument("--seed", type=int, default=0, help="root seed")

    p = sub.add_parser("bound", help="rank bounds of a log-linear model", formatter_class=fmt)
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--search", choices=["auto", "exhaustive", "greedy"], default="auto", help="ordering search")
    p.add_argument("--ignore-main-effects", action="store_true", help="skip main effects in the hierarchy check")
    common(p)
    p.set_defaults(handler=cmd_bound)

    p = sub.add_parser("oracle", help="numerical bracket on the nonnegative rank", formatter_class=fmt)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--tensor", help="tensor file")
    src.add_argument("--model", help="model file")
    p.add_argument("--witness", default=None, help="PARAFAC expansion file capping the search")
    p.add_argument("--restarts", type=int, default=20, help="random restarts per m")
    p.add_argument("--max-iters", type=int, default=5000, help="iterations per restart")
    p.add_argument("--eps", type=float, default=1e-8, help="max-norm residual that counts as exact")
    p.add_argument("--m-min", type=int, default=1, help="smallest term count tried")
    p.add_argument("--m-max", type=int, default=0, help="largest term count tried (0: automatic)")
    common(p, seed=True)
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("verify", help="conditional independence on a partition", formatter_class=fmt)
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--H", required=True, help="levels per variable, 1-based: 2,2,3 or 2+3,-,3")
    p.add_argument("--merge", type=int, default=0, help="variable to merge on, 1-based (0: no merge)")
    p.add_argument("--tol", type=float, default=1e-12, help="largest tolerated violation")
    common(p)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("transform", help="convert between models, tensors and expansions", formatter_class=fmt)
    p.add_argument("--model", default=None, help="model file")
    p.add_argument("--tensor", default=None, help="tensor file")
    p.add_argument("--expansion", default=None, help="expansion file")
    p.add_argument("--to", required=True, choices=["tensor", "model", "expansion"], help="output kind")
    p.add_argument("--prune", type=float, default=0.0, help="drop coefficients at or below this size")
    common(p)
    p.set_defaults(handler=cmd_transform)

    def chain_flags(p, groups_default="learn"):
        p.add_argument("--m", type=int, default=8, help="latent classes per group")
        p.add_argument("--k", type=int, default=3, help="number of groups")
        p.add_argument("--burn", type=int, default=2000, help="burn-in sweeps")
        p.add_argument("--iters", type=int, default=7000, help="total sweeps, burn-in included")
        p.add_argument("--thin", type=int, default=5, help="keep every thin-th sweep after burn-in")
        p.add_argument("--long-schedule", action="store_true", help="10000 burn-in, 25000 total, thin 10")
        p.add_argument("--arm-schedule", choices=["flat", "decreasing"], default="decreasing", help="arm priors")
        p.add_argument("--groups", default=groups_default, help="learn, or fixed:<1-based labels>")
        p.add_argument("--checkpoint", default=None, help="checkpoint file")
        p.add_argument("--checkpoint-every", type=int, default=1000, help="sweeps between checkpoints")
        p.add_argument("--resume", action="store_true", help="continue from --checkpoint if present")

    p = sub.add_parser("fit", help="fit the collapsed Tucker sampler to data", formatter_class=fmt)
    p.add_argument("--data", required=True, help="CSV of 1-based levels, or cells with a count column")
    p.add_argument("--scheme", default=None, help="levels per variable (default: from the data)")
    chain_flags(p)
    common(p, seed=True)
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("simulate", help="simulate data from a graph-supported model", formatter_class=fmt)
    p.add_argument("--graph", default=None, help="named graph: " + ", ".join(catalog.GRAPHS))
    p.add_argument("--edges", default=None, help="inline 1-based edges, e.g. 1-2,2-3")
    p.add_argument("--graph-file", default=None, help="edge list file")
    p.add_argument("--p", type=int, default=0, help="variables for --edges (0: largest vertex)")
    p.add_argument("--levels", type=int, default=2, help="levels per variable")
    p.add_argument("--n", type=int, default=1000, help="observations")
    p.add_argument("--sigma2", type=float, default=9.0, help="variance of the nonzero terms")
    p.add_argument("--fit", action="store_true", help="also fit the sampler and report coverage")
    chain_flags(p)
    common(p, seed=True)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("prior-study", help="log-linear terms induced by the PARAFAC prior", formatter_class=fmt)
    p.add_argument("--p", type=int, default=3, help="variables")
    p.add_argument("--d", type=int, default=20, help="levels per variable")
    p.add_argument("--m", type=int, default=5, help="PARAFAC terms")
    p.add_argument("--schedule", choices=["flat", "decreasing", "both"], default="both", help="arm priors")
    p.add_argument("--draws", type=int, default=10_000, help="Monte Carlo draws")
    p.add_argument("--bins", type=int, default=50, help="histogram bins")
    common(p, seed=True)
    p.set_defaults(handler=cmd_prior_study)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        run = Run(args, argv)
        status = args.handler(run)
        run.write_manifest()
        return status
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(_fmt("usage", exc), file=sys.stderr)
        return EXIT_USAGE
    except CapExceeded as exc:
        print(_fmt("cap", exc), file=sys.stderr)
        return EXIT_CAP
    except (FloatingPointError, OverflowError, ZeroDivisionError, np.linalg.LinAlgError) as exc:
        print(_fmt("numeric", exc), file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, ValueError, KeyError, ModelError, NotWeaklyHierarchical, SchemeMismatch) as exc:
        print(_fmt("input", exc), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
