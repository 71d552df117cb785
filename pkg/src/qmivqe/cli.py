"""Command line frontend; one subcommand per pipeline stage.

Every failure exits nonzero with a message of the form
``error [stage]: ...`` naming the pipeline stage that broke.
"""

import argparse
import sys
from pathlib import Path

from .ansatz import (build_circuit, load_sequence, permute,
                     reduce_first_spot, save_sequence, threshold_pairs)
from .harness import (ExperimentConfig, StageError, correlation_fraction,
                      pipeline_state, resource_surface, run_experiment,
                      stage, summarize)
from .fcidump import parse_fcidump
from .states import QmiMatrix, qmi_matrix
from .vqe import run_batch, runs_to_csv

QMI_SCHEMA = "columns i,j,raw,normalized; one row per qubit pair i<j"
RUNS_SCHEMA = ("columns seed,final_energy,pct_corr,iterations,"
               "converged,n_expectation; one row per optimization")
SEQUENCE_SCHEMA = ("JSON with kind parent_sequence (pairs) or "
                   "entangler_block (cnots)")
GRID_SCHEMA = "columns x,y,value,winner; value nan when no family affordable"


def cmd_info(args):
    with stage("parse"):
        integrals = parse_fcidump(args.fcidump)
    print(f"label           {integrals.source_label}")
    print(f"orbitals        {integrals.n_orbitals}")
    print(f"electrons       {integrals.n_electrons}")
    print(f"ms2             {integrals.ms2}")
    print(f"qubits          {2 * integrals.n_orbitals}")
    print(f"core energy     {integrals.core_energy:.10f}")
    print(f"one-body terms  {int((integrals.h != 0).sum())}")
    print(f"two-body terms  {len(integrals.eri)}")
    return 0


def cmd_qmi(args):
    ps = pipeline_state(args.fcidump, state=args.state, basis=args.basis)
    with stage("qmi"):
        qmi = qmi_matrix(ps.psi, normalization=args.normalization)
        qmi.to_csv(args.out)
    above = sum(1 for i in range(qmi.n_qubits)
                for j in range(i + 1, qmi.n_qubits)
                if qmi.normalized[i, j] > 0.5)
    print(f"wrote {args.out} ({qmi.n_qubits} qubits, "
          f"max raw {qmi.raw.max():.6f}, {above} pairs above 0.5)")
    return 0


def cmd_ansatz(args):
    with stage("sequence"):
        qmi = QmiMatrix.from_csv(args.qmi)
        parent = threshold_pairs(qmi, args.mu,
                                 provenance=f"threshold mu={args.mu} on "
                                            f"{Path(args.qmi).name}")
        if args.reduce:
            parent = reduce_first_spot(parent)
        save_sequence(parent, args.out)
    kind = "reduced parent" if args.reduce else "parent"
    print(f"wrote {args.out} ({kind} sequence, {len(parent.pairs)} pairs)")
    return 0


def cmd_vqe(args):
    ps = pipeline_state(args.fcidump, state=args.state, basis=args.basis)
    n_qubits = 2 * ps.integrals.n_orbitals
    with stage("sequence"):
        obj, seq_qubits = load_sequence(args.sequence)
        if seq_qubits != n_qubits:
            raise ValueError(
                f"sequence is for {seq_qubits} qubits, system has {n_qubits}")
        if hasattr(obj, "pairs"):
            block = permute(obj, args.perm_seed)
        else:
            block = obj
    with stage("vqe"):
        circuit = build_circuit(block, n_qubits, args.depth)
        runs = run_batch(circuit, ps.hamiltonian, args.restarts,
                         args.vqe_seed, jobs=args.jobs)
        runs_to_csv(runs, args.out, ps.e_hf, ps.e_fci)
    pcts = [correlation_fraction(r.final_energy, ps.e_hf, ps.e_fci)
            for r in runs]
    print(f"wrote {args.out} ({len(runs)} runs, depth {args.depth}, "
          f"{circuit.cnot_count} CNOTs, best {max(pcts):.2f}% "
          f"mean {sum(pcts) / len(pcts):.2f}%)")
    return 0


def cmd_sweep(args):
    with stage("config"):
        cfg = ExperimentConfig.from_json(args.config)
        if args.out:
            cfg.output_dir = args.out
        if args.jobs is not None:
            cfg.jobs = args.jobs
    outdir = run_experiment(cfg, progress=print)
    rows = summarize(outdir)
    print(f"archive {outdir}")
    for row in rows:
        print(f"  {row['ansatz']} depth {row['depth']}: "
              f"max {row['max_pct']:.2f}% mean {row['mean_pct']:.2f}% "
              f"within30 {row['within30_pct']:.1f}% ({row['n_runs']} runs)")
    return 0


def cmd_resources(args):
    with stage("resources"):
        x_grid = _parse_grid(args.x) if args.x else None
        y_grid = _parse_grid(args.y) if args.y else None
        grid = resource_surface(args.archive, x_grid=x_grid, y_grid=y_grid)
        out = args.out or str(Path(args.archive) / "resource_grid.csv")
        grid.to_csv(out)
    print(f"wrote {out} ({len(grid.x_values)} CNOT budgets x "
          f"{len(grid.y_values)} restart budgets)")
    return 0


def _parse_grid(text):
    return [int(tok) for tok in text.split(",") if tok.strip()]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qmivqe",
        description="Mutual-information-driven entangler synthesis and "
                    "statevector VQE for molecular Hamiltonians.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="print system facts from an FCIDUMP file")
    p.add_argument("fcidump", help="FCIDUMP integral file")
    p.set_defaults(handler=cmd_info)

    p = sub.add_parser(
        "qmi", help="compute the pair mutual-information matrix",
        epilog=f"output CSV schema: {QMI_SCHEMA}")
    p.add_argument("fcidump", help="FCIDUMP integral file")
    p.add_argument("--state", choices=["mp2", "fci"], default="mp2",
                   help="analysis state (default mp2)")
    p.add_argument("--basis", choices=["hfco", "no"], default="hfco",
                   help="orbital basis: canonical or natural (default hfco)")
    p.add_argument("--normalization", choices=["max", "ln4"], default="max",
                   help="scale by the largest off-diagonal entry or by 2 ln 2")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(handler=cmd_qmi)

    p = sub.add_parser(
        "ansatz", help="derive a parent sequence from a mutual-information CSV",
        epilog=f"input: {QMI_SCHEMA}; output: {SEQUENCE_SCHEMA}")
    p.add_argument("qmi", help=f"mutual-information CSV ({QMI_SCHEMA})")
    p.add_argument("--mu", type=float, required=True,
                   help="threshold in [0, 1); keeps pairs strictly above it")
    p.add_argument("--reduce", action="store_true",
                   help="keep only the first above-threshold partner per row")
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(handler=cmd_ansatz)

    p = sub.add_parser(
        "vqe", help="optimize one circuit family member",
        epilog=f"sequence input: {SEQUENCE_SCHEMA}; output CSV: {RUNS_SCHEMA}")
    p.add_argument("fcidump", help="FCIDUMP integral file")
    p.add_argument("sequence", help=f"sequence document ({SEQUENCE_SCHEMA})")
    p.add_argument("--depth", type=int, default=1,
                   help="entangler block repetitions (default 1)")
    p.add_argument("--perm-seed", type=int, default=0,
                   help="ordering seed when the sequence is a parent set")
    p.add_argument("--restarts", type=int, default=10,
                   help="number of random starts (default 10)")
    p.add_argument("--vqe-seed", type=int, default=0,
                   help="base seed; restart k uses seed base+k")
    p.add_argument("--state", choices=["mp2", "fci"], default="mp2",
                   help="analysis state used when rotating to NO basis")
    p.add_argument("--basis", choices=["hfco", "no"], default="hfco",
                   help="orbital basis for the Hamiltonian")
    p.add_argument("--jobs", type=int, default=1,
                   help="worker processes (default 1)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(handler=cmd_vqe)

    p = sub.add_parser(
        "sweep", help="run a full experiment from a config document",
        epilog="config keys mirror ExperimentConfig: fcidump, basis, state, "
               "mu, reduced, families, depths, permutations, perm_seed, "
               "restarts, vqe_seed, output_dir, jobs, normalization")
    p.add_argument("config", help="JSON config document")
    p.add_argument("--out", default="",
                   help="override the archive directory")
    p.add_argument("--jobs", type=int, default=None,
                   help="override the configured worker count")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser(
        "resources", help="compute the budget surface from an archive",
        epilog=f"output CSV schema: {GRID_SCHEMA}")
    p.add_argument("archive", help="archive directory from a sweep")
    p.add_argument("--x", default="",
                   help="comma-separated CNOT budgets (default: stored sizes)")
    p.add_argument("--y", default="",
                   help="comma-separated restart budgets (default: presets)")
    p.add_argument("--out", default="", help="output CSV path")
    p.set_defaults(handler=cmd_resources)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with stage(args.command):
            return args.handler(args)
    except StageError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
