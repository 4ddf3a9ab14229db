"""Plain-text formats for models, graphs, tensors, expansions and observations.

Every index written to or read from a file is 1-based; everything in memory
is 0-based. Floats are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import csv
import re
from typing import Sequence

import numpy as np

from .loglinear import LogLinearModel, ModelError, check_cells, check_scheme
from .tensors import CTucker, Parafac


class FormatError(ValueError):
    """Malformed input file; the message names the file and line."""


def _lines(path: str):
    with open(path) as fh:
        for number, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield number, line


def _ints(text: str, where: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.split(",") if t.strip() != "")
    except ValueError as exc:
        raise FormatError(f"{where}: expected comma separated integers, got {text!r}") from exc


def _fields(line: str, where: str) -> dict[str, str]:
    out = {}
    for part in line.split(";"):
        if "=" not in part:
            raise FormatError(f"{where}: expected key=value, got {part.strip()!r}")
        key, value = part.split("=", 1)
        out[key.strip()] = value.strip()
    return out


# ---------------------------------------------------------------------------
# log-linear models


def read_model(path: str) -> LogLinearModel:
    scheme = None
    theta0 = 0.0
    theta: dict = {}
    for number, line in _lines(path):
        where = f"{path}:{number}"
        f = _fields(line, where)
        if "scheme" in f:
            scheme = check_scheme(_ints(f["scheme"], where))
            continue
        if "theta0" in f:
            theta0 = float(f["theta0"])
            continue
        if not {"E", "levels", "value"} <= set(f):
            raise FormatError(f"{where}: a record needs E=, levels= and value=")
        E = _ints(f["E"], where)
        levels = _ints(f["levels"], where)
        if len(E) != len(levels) or not E:
            raise FormatError(f"{where}: E and levels must be nonempty and equally long")
        if scheme is None:
            raise FormatError(f"{where}: scheme= must come before the records")
        for j, c in zip(E, levels):
            if not 1 <= j <= len(scheme):
                raise FormatError(f"{where}: variable {j} outside 1..{len(scheme)}")
            if not 2 <= c <= scheme[j - 1]:
                raise FormatError(f"{where}: level {c} of variable {j} outside 2..{scheme[j - 1]}")
        pairs = sorted(zip(E, levels))
        if len({j for j, _ in pairs}) != len(pairs):
            raise FormatError(f"{where}: repeated variable in E")
        key = (tuple(j - 1 for j, _ in pairs), tuple(c - 1 for _, c in pairs))
        if key in theta:
            raise FormatError(f"{where}: duplicate key E={f['E']} levels={f['levels']}")
        try:
            theta[key] = float(f["value"])
        except ValueError as exc:
            raise FormatError(f"{where}: bad value {f['value']!r}") from exc
    if scheme is None:
        raise FormatError(f"{path}: missing scheme= header")
    try:
        return LogLinearModel(scheme, theta, theta0)
    except ModelError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_model(path: str, model: LogLinearModel) -> None:
    with open(path, "w") as fh:
        fh.write("scheme=" + ",".join(map(str, model.scheme)) + "\n")
        fh.write(f"theta0={model.theta0!r}\n")
        for (E, lv), value in sorted(model.theta.items(), key=lambda kv: (len(kv[0][0]), kv[0])):
            fh.write(
                "E=" + ",".join(str(j + 1) for j in E)
                + "; levels=" + ",".join(str(c + 1) for c in lv)
                + f"; value={float(value)!r}\n"
            )


# ---------------------------------------------------------------------------
# graphs


def parse_edges(text: str) -> list[tuple[int, int]]:
    """Inline edge list ``1-2,2-3`` to 0-based pairs."""
    edges = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        m = re.fullmatch(r"(\d+)\s*-\s*(\d+)", item)
        if not m:
            raise FormatError(f"bad edge {item!r}; expected a-b")
        a, b = int(m.group(1)), int(m.group(2))
        if a < 1 or b < 1:
            raise FormatError(f"edge {item!r} uses a variable below 1")
        edges.append((a - 1, b - 1))
    return edges


def read_graph(path: str) -> tuple[int, list[tuple[int, int]]]:
    """Edge list ``j1 j2`` per line; an optional ``p=<int>`` line fixes the variable count."""
    p = None
    edges = []
    for number, line in _lines(path):
        where = f"{path}:{number}"
        if line.startswith("p="):
            p = int(line[2:])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise FormatError(f"{where}: expected two vertices per line")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise FormatError(f"{where}: vertices must be integers") from exc
        if a < 1 or b < 1:
            raise FormatError(f"{where}: vertices are 1-based")
        edges.append((a - 1, b - 1))
    top = 1 + max((max(e) for e in edges), default=-1)
    if p is None:
        p = top
    elif p < top:
        raise FormatError(f"{path}: p={p} but an edge uses variable {top}")
    return p, edges


def write_graph(path: str, p: int, edges: Sequence[tuple[int, int]]) -> None:
    with open(path, "w") as fh:
        fh.write(f"p={p}\n")
        for a, b in edges:
            fh.write(f"{a + 1} {b + 1}\n")


# ---------------------------------------------------------------------------
# tensors


def read_tensor(path: str) -> np.ndarray:
    scheme = None
    out = None
    seen = set()
    for number, line in _lines(path):
        where = f"{path}:{number}"
        f = _fields(line, where)
        if "scheme" in f:
            scheme = check_scheme(_ints(f["scheme"], where))
            check_cells(scheme)
            out = np.zeros(scheme)
            continue
        if out is None:
            raise FormatError(f"{where}: scheme= must come first")
        if not {"cell", "p"} <= set(f):
            raise FormatError(f"{where}: a record needs cell= and p=")
        cell = _ints(f["cell"], where)
        if len(cell) != len(scheme) or any(not 1 <= c <= d for c, d in zip(cell, scheme)):
            raise FormatError(f"{where}: cell {cell} outside the scheme")
        if cell in seen:
            raise FormatError(f"{where}: duplicate cell {cell}")
        seen.add(cell)
        try:
            out[tuple(c - 1 for c in cell)] = float(f["p"])
        except ValueError as exc:
            raise FormatError(f"{where}: bad probability {f['p']!r}") from exc
    if out is None:
        raise FormatError(f"{path}: missing scheme= header")
    return out


def write_tensor(path: str, pi: np.ndarray, skip_zero: bool = True) -> None:
    pi = np.asarray(pi, dtype=float)
    with open(path, "w") as fh:
        fh.write("scheme=" + ",".join(map(str, pi.shape)) + "\n")
        for cell in np.ndindex(pi.shape):
            if skip_zero and pi[cell] == 0:
                continue
            fh.write("cell=" + ",".join(str(c + 1) for c in cell) + f"; p={float(pi[cell])!r}\n")


# ---------------------------------------------------------------------------
# expansions


def _row(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def write_expansion(path: str, exp: Parafac | CTucker) -> None:
    """Labeled sections: ``[weights]`` or ``[groups]``/``[core]``, then one ``[arm j]`` per variable."""
    with open(path, "w") as fh:
        if isinstance(exp, Parafac):
            fh.write("kind=parafac\n[weights]\n" + _row(exp.weights) + "\n")
        else:
            fh.write("kind=ctucker\n[groups]\n" + ",".join(str(g + 1) for g in exp.groups) + "\n")
            fh.write("[core]\nshape=" + ",".join(map(str, exp.core.shape)) + "\n" + _row(exp.core.ravel()) + "\n")
        for j, arm in enumerate(exp.arms, start=1):
            fh.write(f"[arm {j}]\n")
            for r in arm:
                fh.write(_row(r) + "\n")


def read_expansion(path: str) -> Parafac | CTucker:
    kind = None
    sections: dict[str, list[str]] = {}
    current = None
    for number, line in _lines(path):
        if line.startswith("kind="):
            kind = line[5:].strip()
        elif line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            sections[current] = []
        elif current is None:
            raise FormatError(f"{path}:{number}: data outside a section")
        else:
            sections[current].append(line)
    arms_named = sorted((int(name.split()[1]), rows) for name, rows in sections.items() if name.startswith("arm "))
    if [j for j, _ in arms_named] != list(range(1, len(arms_named) + 1)):
        raise FormatError(f"{path}: arm sections must be numbered 1..p")
    try:
        arms = tuple(np.array([[float(v) for v in r.split(",")] for r in rows]) for _, rows in arms_named)
        if kind == "parafac":
            weights = np.array([float(v) for v in sections["weights"][0].split(",")])
            return Parafac(weights, arms)
        if kind == "ctucker":
            groups = tuple(int(g) - 1 for g in sections["groups"][0].split(","))
            shape = _ints(sections["core"][0].split("=", 1)[1], path)
            core = np.array([float(v) for v in sections["core"][1].split(",")]).reshape(shape)
            return CTucker(groups, core, arms)
    except (KeyError, IndexError, ValueError) as exc:
        raise FormatError(f"{path}: malformed expansion ({exc})") from exc
    raise FormatError(f"{path}: unknown expansion kind {kind!r}")


# ---------------------------------------------------------------------------
# observations


def read_data(path: str, scheme: Sequence[int] | None = None) -> tuple[np.ndarray, list[str], tuple[int, ...]]:
    """Observations as an ``(n, p)`` array of 0-based levels, the names and the scheme.

    A header whose last column is ``count`` marks the cell-count format,
    which is expanded to one row per observation. Without ``scheme`` the
    number of levels of each variable is its largest observed level.
    """
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    counted = header[-1].lower() == "count"
    names = header[:-1] if counted else header
    cells, weights = [], []
    for number, r in enumerate(rows[1:], start=2):
        if len(r) != len(header):
            raise FormatError(f"{path}:{number}: expected {len(header)} fields")
        try:
            values = [int(v) for v in r]
        except ValueError as exc:
            raise FormatError(f"{path}:{number}: levels must be integers") from exc
        if counted:
            if values[-1] < 0:
                raise FormatError(f"{path}:{number}: negative count")
            cells.append(values[:-1])
            weights.append(values[-1])
        else:
            cells.append(values)
            weights.append(1)
    arr = np.array(cells, dtype=np.int64).reshape(-1, len(names))
    if arr.size and arr.min() < 1:
        raise FormatError(f"{path}: levels are 1-based")
    arr = np.repeat(arr - 1, weights, axis=0)
    if scheme is None:
        if arr.shape[0] == 0:
            raise FormatError(f"{path}: cannot infer the scheme from no observations")
        scheme = tuple(max(2, int(v) + 1) for v in arr.max(axis=0))
    scheme = check_scheme(scheme)
    if len(scheme) != len(names):
        raise FormatError(f"{path}: {len(names)} columns but {len(scheme)} variables in the scheme")
    if arr.shape[0] and np.any(arr >= np.array(scheme)):
        raise FormatError(f"{path}: a level exceeds the scheme")
    return arr, names, scheme


def write_data(path: str, observations: np.ndarray, names: Sequence[str] | None = None) -> None:
    observations = np.asarray(observations)
    p = observations.shape[1]
    names = list(names) if names is not None else [f"y{j + 1}" for j in range(p)]
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(names)
        out.writerows((observations + 1).tolist())


def write_cell_counts(path: str, counts: np.ndarray, names: Sequence[str] | None = None) -> None:
    counts = np.asarray(counts)
    names = list(names) if names is not None else [f"y{j + 1}" for j in range(counts.ndim)]
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(names + ["count"])
        for cell in np.ndindex(counts.shape):
            if counts[cell]:
                out.writerow([c + 1 for c in cell] + [int(counts[cell])])
