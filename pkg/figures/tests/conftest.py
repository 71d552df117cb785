"""Synthetic archive files in the exported formats, for renderer tests."""

import json
from pathlib import Path

QMI_HEADER = "i,j,raw,normalized"
RUNS_HEADER = "seed,final_energy,pct_corr,iterations,converged,n_expectation"
GRID_HEADER = "x,y,value,winner"


def write_qmi_csv(path, normalized, raw=None):
    n = normalized.shape[0]
    raw = normalized if raw is None else raw
    lines = [QMI_HEADER]
    for i in range(n):
        for j in range(i + 1, n):
            lines.append(
                f"{i},{j},{raw[i, j]:.12e},{normalized[i, j]:.12e}")
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)


def write_runs_csv(path, pcts, base_seed=11):
    lines = [RUNS_HEADER]
    for k, pct in enumerate(pcts):
        lines.append(f"{base_seed + k},-1.5,{pct},7,true,2.0")
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)


def write_archive(root, tables):
    """tables: label -> depth -> list of pct values."""
    for label, by_depth in tables.items():
        label_dir = Path(root) / "runs" / label
        label_dir.mkdir(parents=True, exist_ok=True)
        for depth, pcts in by_depth.items():
            write_runs_csv(label_dir / f"{depth}.csv", pcts)
    return Path(root)


def write_grid_csv(path, cells):
    """cells: list of (x, y, value_text, winner) rows."""
    lines = [GRID_HEADER]
    for x, y, value, winner in cells:
        lines.append(f"{x},{y},{value},{winner}")
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)


def write_sequence_json(path, kind, n_qubits, pairs):
    key = "pairs" if kind == "parent_sequence" else "cnots"
    doc = {"kind": kind, "n_qubits": n_qubits,
           key: [list(p) for p in pairs]}
    if kind == "parent_sequence":
        doc.update({"mu": 0.5, "reduced": False, "provenance": "test data"})
    Path(path).write_text(json.dumps(doc, indent=1))
    return Path(path)
