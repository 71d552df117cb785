"""End-to-end experiment driver with statistics and resource accounting.

run_experiment takes a config, runs the full pipeline (integrals, mean
field, mutual information, entangler synthesis, batched VQE over every
requested family and depth) and writes a self-contained archive:

  manifest                  JSON: config echo, tool versions, reference
                            energies, every seed, per-label block sizes,
                            off-sector run counts
  qmi/<state>_<basis>.csv   pair mutual-information table
  sequences/*.json          parent sequences and entangler blocks
  runs/<label>/<depth>.csv  one optimization per row, seed order
  summary.csv               per label/depth statistics
  resource_grid.csv         best expected %E_c under CNOT/restart budgets

Any stage failure raises StageError carrying the stage name; files
written before the failure stay on disk.
"""

import csv
import json
import math
import multiprocessing
import os
import platform
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy
from numpy.lib.stride_tricks import sliding_window_view

from . import __version__
from .ansatz import (build_circuit, ladder, permute, random_entangler,
                     reduce_first_spot, save_sequence, threshold_pairs)
from .encoding import build_hamiltonian
from .fcidump import parse_fcidump
from .meanfield import hf_energy, mp2_amplitudes, mp2_energy
from .natorb import (natural_orbitals, one_body_rdm_spatial,
                     rotate_statevector, transform_integrals)
from .states import fci_ground_state, mp2_statevector, qmi_matrix
from .vqe import minimize_vqe, runs_from_csv, runs_to_csv

__all__ = [
    "ExperimentConfig",
    "PipelineState",
    "ResourceGrid",
    "StageError",
    "correlation_fraction",
    "f_sigma",
    "pipeline_state",
    "resource_surface",
    "run_experiment",
    "summarize",
]

OUTPUT_DIR_ENV = "QMIVQE_OUTDIR"
OFFSECTOR_TOL = 0.01
SUMMARY_HEADER = ["ansatz", "depth", "n_runs", "max_pct", "mean_pct",
                  "within30_pct"]
GRID_HEADER = ["x", "y", "value", "winner"]
DEFAULT_Y_BUDGETS = [1, 2, 3, 5, 10, 15, 20, 30, 50, 100, 200]

WITHIN30_NOTE = (
    "within30_pct counts runs with pct_corr >= 0.7 * (max pct_corr of the "
    "same ansatz and depth); the absolute alternative, pct_corr >= max "
    "pct_corr - 30, is not used")


class StageError(RuntimeError):
    """Pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage, message):
        super().__init__(message)
        self.stage = stage


@contextmanager
def stage(name):
    """Re-raise any failure inside the block as a StageError."""
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(name, str(exc)) from exc


def correlation_fraction(energy, e_hf, e_fci):
    """Percent of the correlation energy recovered by an energy value."""
    if not e_fci < e_hf:
        raise ValueError(
            f"degenerate correlation window: E_FCI={e_fci} is not below "
            f"E_HF={e_hf}")
    return 100.0 * (energy - e_hf) / (e_fci - e_hf)


def f_sigma(sigma_cnots, x):
    """Deepest circuit affordable with x CNOTs; 0 means none."""
    if sigma_cnots < 1:
        raise ValueError(f"block CNOT count must be positive, got {sigma_cnots}")
    if x < 0:
        raise ValueError(f"CNOT budget must be nonnegative, got {x}")
    return int(x // sigma_cnots)


_FAMILIES = ("qida", "ladder", "random")


@dataclass
class ExperimentConfig:
    """Everything run_experiment needs, mirroring the config JSON keys."""

    fcidump: str
    basis: str = "hfco"
    state: str = "mp2"
    mu: list = field(default_factory=lambda: [0.5])
    reduced: bool = False
    families: list = field(default_factory=lambda: list(_FAMILIES))
    depths: list = field(default_factory=lambda: [1])
    permutations: int = 2
    perm_seed: int = 7
    restarts: object = 3
    vqe_seed: int = 11
    output_dir: str = ""
    jobs: int = 1
    normalization: str = "max"

    def __post_init__(self):
        self.basis = self.basis.lower()
        self.state = self.state.lower()
        if self.basis not in ("hfco", "no"):
            raise ValueError(f"basis must be hfco or no, got {self.basis!r}")
        if self.state not in ("mp2", "fci"):
            raise ValueError(f"state must be mp2 or fci, got {self.state!r}")
        self.mu = [float(m) for m in self.mu]
        for m in self.mu:
            if not 0.0 <= m < 1.0:
                raise ValueError(f"threshold {m} outside [0, 1)")
        unknown = set(self.families) - set(_FAMILIES)
        if unknown:
            raise ValueError(f"unknown ansatz families {sorted(unknown)}")
        if not self.families:
            raise ValueError("at least one ansatz family is required")
        if "qida" in self.families and not self.mu:
            raise ValueError("the qida family needs at least one threshold")
        self.depths = sorted({int(d) for d in self.depths})
        if not self.depths or self.depths[0] < 1:
            raise ValueError("depths must be positive integers")
        if self.permutations < 1:
            raise ValueError("permutation count must be at least 1")
        for fam in self.families:
            if self.restarts_for(fam) < 1:
                raise ValueError(f"restarts for {fam} must be at least 1")
        if self.normalization not in ("max", "ln4"):
            raise ValueError(
                f"normalization must be max or ln4, got {self.normalization!r}")

    def restarts_for(self, family):
        if isinstance(self.restarts, dict):
            if family not in self.restarts:
                raise ValueError(f"no restart count configured for {family}")
            return int(self.restarts[family])
        return int(self.restarts)

    def resolve_output_dir(self):
        if self.output_dir:
            return Path(self.output_dir)
        env = os.environ.get(OUTPUT_DIR_ENV)
        if env:
            return Path(env)
        return Path("qmivqe_archive")

    @classmethod
    def from_json(cls, path):
        with open(path) as fh:
            doc = json.load(fh)
        known = set(cls.__dataclass_fields__)
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        if "fcidump" not in doc:
            raise ValueError("config needs an fcidump path")
        return cls(**doc)

    def to_dict(self):
        return {
            "fcidump": self.fcidump,
            "basis": self.basis,
            "state": self.state,
            "mu": list(self.mu),
            "reduced": self.reduced,
            "families": list(self.families),
            "depths": list(self.depths),
            "permutations": self.permutations,
            "perm_seed": self.perm_seed,
            "restarts": self.restarts,
            "vqe_seed": self.vqe_seed,
            "output_dir": str(self.output_dir),
            "jobs": self.jobs,
            "normalization": self.normalization,
        }


def _qida_label(mu, reduced):
    return f"qida_mu{mu:g}" + ("_red" if reduced else "")


@dataclass
class PipelineState:
    """Shared front end of every command: integrals through analysis state.

    The integrals and Hamiltonian are in the requested orbital basis; the
    reference energies are basis independent and always reported in the
    parsed (canonical) basis.
    """

    integrals: object
    hamiltonian: object
    psi: object
    e_hf: float
    e_mp2: float
    e_fci: float
    rotation: object = None


def pipeline_state(fcidump_path, state="mp2", basis="hfco"):
    """Parse, solve the references, and build the analysis state."""
    if state not in ("mp2", "fci"):
        raise StageError("state", f"state must be mp2 or fci, got {state!r}")
    if basis not in ("hfco", "no"):
        raise StageError("rotation",
                         f"basis must be hfco or no, got {basis!r}")
    with stage("parse"):
        integrals = parse_fcidump(fcidump_path)
    with stage("meanfield"):
        e_hf = hf_energy(integrals)
        amplitudes = mp2_amplitudes(integrals)
        e_mp2 = mp2_energy(amplitudes)
    with stage("encode"):
        hamiltonian = build_hamiltonian(integrals)
    with stage("reference"):
        e_fci, fci_state = fci_ground_state(hamiltonian,
                                            integrals.n_electrons)
    with stage("state"):
        psi = mp2_statevector(amplitudes) if state == "mp2" else fci_state
    rotation = None
    if basis == "no":
        with stage("rotation"):
            density = one_body_rdm_spatial(psi)
            _, rotation = natural_orbitals(density)
            integrals = transform_integrals(integrals, rotation)
            hamiltonian = build_hamiltonian(integrals)
            psi = rotate_statevector(psi, rotation)
    return PipelineState(integrals=integrals, hamiltonian=hamiltonian,
                         psi=psi, e_hf=e_hf, e_mp2=e_mp2, e_fci=e_fci,
                         rotation=rotation)


_pool_context = None


def _unit_worker(unit):
    block_index, seed = unit
    circuits, hamiltonian = _pool_context
    return block_index, minimize_vqe(circuits[block_index], hamiltonian, seed)


def _run_units(circuits, hamiltonian, restarts, base_seed, jobs):
    """All (block, restart) units for one label and depth, seed order."""
    units = [(p, base_seed + p * restarts + r)
             for p in range(len(circuits)) for r in range(restarts)]
    if jobs <= 1:
        results = [_run_single(circuits, hamiltonian, unit) for unit in units]
    else:
        global _pool_context
        _pool_context = (circuits, hamiltonian)
        try:
            ctx = multiprocessing.get_context("fork")
            with ctx.Pool(processes=min(jobs, len(units))) as pool:
                results = pool.map(_unit_worker, units)
        finally:
            _pool_context = None
    results.sort(key=lambda item: item[1].seed)
    return [run for _, run in results]


def _run_single(circuits, hamiltonian, unit):
    block_index, seed = unit
    return block_index, minimize_vqe(circuits[block_index], hamiltonian, seed)


def run_experiment(cfg, progress=None):
    """Execute the configured sweep and write the archive; returns its path."""

    def note(message):
        if progress is not None:
            progress(message)

    outdir = cfg.resolve_output_dir()
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "qmi").mkdir(exist_ok=True)
    (outdir / "sequences").mkdir(exist_ok=True)
    (outdir / "runs").mkdir(exist_ok=True)

    ps = pipeline_state(cfg.fcidump, state=cfg.state, basis=cfg.basis)
    integrals = ps.integrals
    hamiltonian = ps.hamiltonian
    e_hf, e_mp2, e_fci = ps.e_hf, ps.e_mp2, ps.e_fci
    n_qubits = 2 * integrals.n_orbitals
    note(f"parsed {integrals.source_label}: {integrals.n_orbitals} orbitals, "
         f"{integrals.n_electrons} electrons, {n_qubits} qubits")
    note(f"E_HF = {e_hf:.10f}  E_MP2 corr = {e_mp2:.10f}  E_FCI = {e_fci:.10f}")

    with stage("qmi"):
        qmi = qmi_matrix(ps.psi, normalization=cfg.normalization)
        qmi_path = outdir / "qmi" / f"{cfg.state}_{cfg.basis}.csv"
        qmi.to_csv(qmi_path)
    note(f"wrote {qmi_path}")

    with stage("sequence"):
        blocks_by_label = {}
        parent_sizes = {}
        for family in cfg.families:
            if family == "qida":
                for mu in cfg.mu:
                    parent = threshold_pairs(qmi, mu)
                    if cfg.reduced:
                        parent = reduce_first_spot(parent)
                    label = _qida_label(mu, cfg.reduced)
                    if not parent.pairs:
                        raise ValueError(
                            f"threshold {mu} leaves no pairs for {label}")
                    save_sequence(parent, outdir / "sequences" / f"{label}.json")
                    blocks = [permute(parent, cfg.perm_seed + k)
                              for k in range(cfg.permutations)]
                    blocks_by_label[label] = ("qida", blocks)
                    parent_sizes[label] = len(parent.pairs)
            elif family == "ladder":
                blocks_by_label["ladder"] = ("ladder", [ladder(n_qubits)])
            else:
                blocks = [random_entangler(n_qubits, cfg.perm_seed + k)
                          for k in range(cfg.permutations)]
                blocks_by_label["random"] = ("random", blocks)
        for label, (_, blocks) in blocks_by_label.items():
            for p, block in enumerate(blocks):
                if label == "ladder":
                    path = outdir / "sequences" / "ladder.json"
                else:
                    path = outdir / "sequences" / f"{label}_perm{p}.json"
                save_sequence(block, path, n_qubits=n_qubits,
                              provenance=f"{label} ordering {p}")

    sigma_cnots = {label: len(blocks[0].cnots)
                   for label, (_, blocks) in blocks_by_label.items()}
    manifest = {
        "config": cfg.to_dict(),
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "qmivqe": __version__,
        },
        "source_label": integrals.source_label,
        "n_qubits": n_qubits,
        "n_electrons": integrals.n_electrons,
        "energies": {"hf": e_hf, "mp2_correction": e_mp2, "fci": e_fci},
        "seeds": {
            "perm_seed": cfg.perm_seed,
            "vqe_seed": cfg.vqe_seed,
            "vqe_base_by_label": {label: cfg.vqe_seed
                                  for label in blocks_by_label},
        },
        "sigma_cnots": sigma_cnots,
        "parent_sizes": parent_sizes,
        "offsector_runs": {},
        "metric_notes": WITHIN30_NOTE,
    }
    _write_manifest(outdir, manifest)

    with stage("vqe"):
        offsector = {}
        for label, (family, blocks) in blocks_by_label.items():
            restarts = cfg.restarts_for(family)
            label_dir = outdir / "runs" / label
            label_dir.mkdir(exist_ok=True)
            offsector[label] = {}
            for depth in cfg.depths:
                circuits = [build_circuit(block, n_qubits, depth)
                            for block in blocks]
                runs = _run_units(circuits, hamiltonian, restarts,
                                  cfg.vqe_seed, cfg.jobs)
                runs_to_csv(runs, label_dir / f"{depth}.csv", e_hf, e_fci)
                off = sum(
                    1 for run in runs
                    if abs(run.particle_number_expectation
                           - integrals.n_electrons) > OFFSECTOR_TOL)
                offsector[label][str(depth)] = off
                best = max(correlation_fraction(r.final_energy, e_hf, e_fci)
                           for r in runs)
                note(f"{label} depth {depth}: {len(runs)} runs, "
                     f"best {best:.2f}% of the correlation energy")
        manifest["offsector_runs"] = offsector
        _write_manifest(outdir, manifest)

    with stage("summary"):
        summarize(outdir)

    with stage("resources"):
        grid = resource_surface(outdir)
        grid.to_csv(outdir / "resource_grid.csv")

    return outdir


def _write_manifest(outdir, manifest):
    with open(outdir / "manifest", "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _load_archive_runs(archive):
    """Map label -> depth -> rows (seed order) from an archive directory."""
    runs_dir = Path(archive) / "runs"
    if not runs_dir.is_dir():
        raise FileNotFoundError(f"{archive} has no runs directory")
    table = {}
    for label_dir in sorted(runs_dir.iterdir()):
        if not label_dir.is_dir():
            continue
        depths = {}
        for csv_path in sorted(label_dir.glob("*.csv")):
            depths[int(csv_path.stem)] = runs_from_csv(csv_path)
        if depths:
            table[label_dir.name] = depths
    if not table:
        raise ValueError(f"{archive} contains no run tables")
    return table


def summarize(archive, out_path=None):
    """Per label/depth statistics, written as summary.csv.

    within30_pct is the share of runs, in percent, whose %E_c reaches at
    least 70% of the best run of the same label and depth.
    """
    table = _load_archive_runs(archive)
    rows = []
    for label in sorted(table):
        for depth in sorted(table[label]):
            pcts = np.array([row["pct_corr"] for row in table[label][depth]])
            best = float(pcts.max())
            within = 100.0 * float(np.mean(pcts >= 0.7 * best))
            rows.append({
                "ansatz": label,
                "depth": depth,
                "n_runs": int(pcts.size),
                "max_pct": best,
                "mean_pct": float(pcts.mean()),
                "within30_pct": within,
            })
    if out_path is None:
        out_path = Path(archive) / "summary.csv"
    with open(out_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_HEADER)
        for row in rows:
            writer.writerow([
                row["ansatz"], row["depth"], row["n_runs"],
                f"{row['max_pct']:.11e}", f"{row['mean_pct']:.11e}",
                f"{row['within30_pct']:.11e}",
            ])
    return rows


@dataclass
class ResourceGrid:
    """Best expected %E_c for each CNOT budget x and restart budget y."""

    x_values: list
    y_values: list
    values: np.ndarray
    winners: list

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(GRID_HEADER)
            for i, x in enumerate(self.x_values):
                for j, y in enumerate(self.y_values):
                    value = self.values[i, j]
                    text = "nan" if math.isnan(value) else f"{value:.11e}"
                    writer.writerow([x, y, text, self.winners[i][j]])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if header != GRID_HEADER:
                raise ValueError(f"{path}: unexpected header {header}")
            cells = {(int(r[0]), int(r[1])): (float(r[2]), r[3])
                     for r in reader}
        xs = sorted({x for x, _ in cells})
        ys = sorted({y for _, y in cells})
        values = np.full((len(xs), len(ys)), np.nan)
        winners = [["" for _ in ys] for _ in xs]
        for (x, y), (value, winner) in cells.items():
            i, j = xs.index(x), ys.index(y)
            values[i, j] = value
            winners[i][j] = winner
        return cls(xs, ys, values, winners)


def _label_cell_value(pcts_by_depth, usable_depths, y):
    """Mean over sliding run windows of the best %E_c within the budget.

    Windows of y consecutive runs (seed order) emulate drawing y restarts;
    every window is averaged, so the y=1 value is the plain mean and
    growing either budget can only raise the estimate.
    """
    arr = np.array([pcts_by_depth[d] for d in usable_depths])
    if arr.shape[1] < y:
        return None
    windows = sliding_window_view(arr, y, axis=1)
    return float(np.mean(windows.max(axis=(0, 2))))


def resource_surface(archive, sigmas=None, x_grid=None, y_grid=None):
    """Best expected %E_c per (CNOT budget, restart budget) cell.

    Missing cells (no family affordable, or more restarts requested than
    any family stored) keep a NaN value and an empty winner label.
    """
    table = _load_archive_runs(archive)
    if sigmas is None:
        with open(Path(archive) / "manifest") as fh:
            sigmas = json.load(fh)["sigma_cnots"]
    missing = set(table) - set(sigmas)
    if missing:
        raise ValueError(f"no block size recorded for {sorted(missing)}")

    pcts = {label: {depth: np.array([row["pct_corr"] for row in rows])
                    for depth, rows in depths.items()}
            for label, depths in table.items()}
    run_counts = {label: min(arr.size for arr in by_depth.values())
                  for label, by_depth in pcts.items()}

    if x_grid is None:
        x_grid = sorted({sigmas[label] * depth
                         for label in table for depth in table[label]})
    if y_grid is None:
        cap = min(run_counts.values())
        y_grid = [y for y in DEFAULT_Y_BUDGETS if y <= cap]
    x_grid = sorted({int(x) for x in x_grid})
    y_grid = sorted({int(y) for y in y_grid})
    if not x_grid or not y_grid or y_grid[0] < 1:
        raise ValueError("budget grids must be nonempty and positive")

    values = np.full((len(x_grid), len(y_grid)), np.nan)
    winners = [["" for _ in y_grid] for _ in x_grid]
    for i, x in enumerate(x_grid):
        for j, y in enumerate(y_grid):
            best = None
            winner = ""
            for label in sorted(table):
                max_depth = f_sigma(sigmas[label], x)
                usable = [d for d in sorted(table[label]) if d <= max_depth]
                if not usable or run_counts[label] < y:
                    continue
                value = _label_cell_value(pcts[label], usable, y)
                if value is not None and (best is None or value > best):
                    best = value
                    winner = label
            if best is not None:
                values[i, j] = best
                winners[i][j] = winner
    return ResourceGrid(x_grid, y_grid, values, winners)
