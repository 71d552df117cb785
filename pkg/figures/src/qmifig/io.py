"""Readers for the archive file formats the render commands consume.

The producing package owns these formats; the headers are checked verbatim
so that schema drift fails loudly instead of rendering nonsense. Paths and
layout:

  qmi CSV             columns i,j,raw,normalized; one row per pair i < j
  runs CSV            columns seed,final_energy,pct_corr,iterations,
                      converged,n_expectation; one row per optimization
  resource grid CSV   columns x,y,value,winner; value "nan" for cells with
                      no affordable circuit family
  sequence JSON       kind parent_sequence (pairs) or entangler_block
                      (cnots), both with n_qubits
  archive directory   runs/<label>/<depth>.csv tables under one root
"""

import csv
import json
from pathlib import Path

import numpy as np

QMI_HEADER = ["i", "j", "raw", "normalized"]
RUNS_HEADER = ["seed", "final_energy", "pct_corr", "iterations",
               "converged", "n_expectation"]
GRID_HEADER = ["x", "y", "value", "winner"]


class SchemaError(ValueError):
    """An input file does not match the format its reader expects."""


def _check_header(path, header, expected):
    if header != expected:
        raise SchemaError(
            f"{path}: expected columns {','.join(expected)}, "
            f"found {','.join(header)}")


def read_qmi(path):
    """Mutual-information CSV as two symmetric n x n arrays.

    Returns (raw, normalized). Every pair i < j must appear exactly once,
    so the row count fixes the qubit count.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        _check_header(path, next(reader, []), QMI_HEADER)
        cells = {}
        for row in reader:
            if len(row) != len(QMI_HEADER):
                raise SchemaError(f"{path}: malformed row {row}")
            i, j = int(row[0]), int(row[1])
            if not 0 <= i < j:
                raise SchemaError(f"{path}: pair ({i}, {j}) is not ordered")
            if (i, j) in cells:
                raise SchemaError(f"{path}: duplicate pair ({i}, {j})")
            cells[(i, j)] = (float(row[2]), float(row[3]))
    if not cells:
        raise SchemaError(f"{path}: no pair rows")
    n = max(j for _, j in cells) + 1
    if len(cells) != n * (n - 1) // 2:
        raise SchemaError(
            f"{path}: {len(cells)} pairs do not fill a {n}-qubit triangle")
    raw = np.zeros((n, n))
    normalized = np.zeros((n, n))
    for (i, j), (raw_val, norm_val) in cells.items():
        raw[i, j] = raw[j, i] = raw_val
        normalized[i, j] = normalized[j, i] = norm_val
    return raw, normalized


def read_runs(path):
    """One optimization table as a list of row dicts."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        _check_header(path, next(reader, []), RUNS_HEADER)
        rows = []
        for row in reader:
            if len(row) != len(RUNS_HEADER):
                raise SchemaError(f"{path}: malformed row {row}")
            rows.append({
                "seed": int(row[0]),
                "final_energy": float(row[1]),
                "pct_corr": float(row[2]),
                "iterations": int(row[3]),
                "converged": row[4] == "true",
                "n_expectation": float(row[5]),
            })
    return rows


def read_archive_runs(archive):
    """All pct_corr samples of an archive, as {label: {depth: array}}.

    The result is empty when the runs tree holds no tables; a missing
    runs directory is a schema failure.
    """
    runs_dir = Path(archive) / "runs"
    if not runs_dir.is_dir():
        raise SchemaError(f"{archive} has no runs directory")
    table = {}
    for csv_path in sorted(runs_dir.glob("*/*.csv")):
        label = csv_path.parent.name
        try:
            depth = int(csv_path.stem)
        except ValueError:
            raise SchemaError(
                f"{csv_path}: table name is not a circuit depth") from None
        rows = read_runs(csv_path)
        table.setdefault(label, {})[depth] = np.array(
            [row["pct_corr"] for row in rows])
    return table


def read_grid(path):
    """Resource surface as (x_values, y_values, values, winners).

    values is laid out [x, y] with NaN for unreachable cells; winners is
    a matching nested list of family labels, empty where NaN.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        _check_header(path, next(reader, []), GRID_HEADER)
        cells = {}
        for row in reader:
            if len(row) != len(GRID_HEADER):
                raise SchemaError(f"{path}: malformed row {row}")
            cells[(int(row[0]), int(row[1]))] = (float(row[2]), row[3])
    if not cells:
        raise SchemaError(f"{path}: no grid rows")
    xs = sorted({x for x, _ in cells})
    ys = sorted({y for _, y in cells})
    values = np.full((len(xs), len(ys)), np.nan)
    winners = [["" for _ in ys] for _ in xs]
    for (x, y), (value, winner) in cells.items():
        i, j = xs.index(x), ys.index(y)
        values[i, j] = value
        winners[i][j] = winner
    return xs, ys, values, winners


def read_sequence(path):
    """Qubit pairs of a sequence document plus its qubit count.

    Both document kinds reduce to a pair list here; rendering does not
    distinguish a parent set from an ordered block.
    """
    with open(path) as fh:
        doc = json.load(fh)
    kind = doc.get("kind")
    if kind == "parent_sequence":
        pairs = [tuple(int(q) for q in p) for p in doc["pairs"]]
    elif kind == "entangler_block":
        pairs = [tuple(int(q) for q in c) for c in doc["cnots"]]
    else:
        raise SchemaError(f"{path}: unknown sequence kind {kind!r}")
    return pairs, int(doc["n_qubits"])
