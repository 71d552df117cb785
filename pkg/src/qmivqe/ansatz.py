"""Entangler topologies derived from mutual information, plus baselines.

A parent sequence is the set of qubit pairs whose normalized mutual
information exceeds a threshold. Orderings of those pairs become CNOT
blocks; a circuit stacks one initial R_Y layer and ``depth`` repetitions of
the block, each followed by R_Y rotations on the qubits the block touches.
"""

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "CircuitSpec",
    "EntanglerBlock",
    "ParentSequence",
    "build_circuit",
    "enumerate_permutations",
    "ladder",
    "load_sequence",
    "permute",
    "random_entangler",
    "reduce_first_spot",
    "save_sequence",
    "threshold_pairs",
]

PERMUTATION_LIMIT = 5040


def _check_pair(i, j, n):
    if not 0 <= i < j < n:
        raise ValueError(f"pair ({i}, {j}) is not ordered inside [0, {n})")


@dataclass
class ParentSequence:
    """Above-threshold qubit pairs, sorted, with their provenance."""

    n_qubits: int
    pairs: list
    mu: float
    reduced: bool = False
    provenance: str = ""

    def __post_init__(self):
        self.pairs = sorted(tuple(p) for p in self.pairs)
        seen = set()
        for i, j in self.pairs:
            _check_pair(i, j, self.n_qubits)
            if (i, j) in seen:
                raise ValueError(f"duplicate pair ({i}, {j})")
            seen.add((i, j))
        if not 0.0 <= self.mu < 1.0:
            raise ValueError(f"threshold {self.mu} outside [0, 1)")


@dataclass
class EntanglerBlock:
    """An ordered list of CNOTs given as (control, target) qubit pairs."""

    cnots: list

    def __post_init__(self):
        self.cnots = [tuple(c) for c in self.cnots]
        for c, t in self.cnots:
            if c == t:
                raise ValueError(f"CNOT control and target coincide at {c}")

    def touched_qubits(self):
        return sorted({q for pair in self.cnots for q in pair})


def threshold_pairs(qmi, mu, provenance=None):
    """Pairs with normalized mutual information strictly above mu."""
    if not 0.0 <= mu < 1.0:
        raise ValueError(f"threshold {mu} outside [0, 1)")
    n = qmi.n_qubits
    pairs = [(i, j)
             for i in range(n) for j in range(i + 1, n)
             if qmi.normalized[i, j] > mu]
    if provenance is None:
        provenance = f"threshold mu={mu} ({qmi.normalization_mode})"
    return ParentSequence(n, pairs, mu, reduced=False, provenance=provenance)


def reduce_first_spot(parent):
    """Keep only the first above-threshold partner of each row.

    Scanning the upper triangle row by row, row i contributes its lowest j
    with (i, j) in the parent; every other pair of that row is dropped.
    """
    kept = []
    for i, j in parent.pairs:
        if not kept or kept[-1][0] != i:
            kept.append((i, j))
    return ParentSequence(
        parent.n_qubits, kept, parent.mu, reduced=True,
        provenance=f"{parent.provenance} reduced")


def permute(parent, seed):
    """Uniformly random ordering of the parent pairs (PCG64, seeded).

    Controls sit on the smaller qubit index, targets on the larger.
    """
    if not parent.pairs:
        raise ValueError("cannot order an empty parent sequence")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(parent.pairs))
    return EntanglerBlock([parent.pairs[k] for k in order])


def enumerate_permutations(parent, limit=PERMUTATION_LIMIT):
    """All orderings of the parent pairs, lexicographic, as blocks."""
    if not parent.pairs:
        raise ValueError("cannot order an empty parent sequence")
    count = math.factorial(len(parent.pairs))
    if count > limit:
        raise ValueError(
            f"{len(parent.pairs)} pairs give {count} orderings, "
            f"above the limit of {limit}")
    return [EntanglerBlock(list(p))
            for p in itertools.permutations(parent.pairs)]


def ladder(n_qubits):
    """Nearest-neighbor chain block: (0,1), (1,2), ..., (n-2, n-1)."""
    if n_qubits < 2:
        raise ValueError("a ladder needs at least two qubits")
    return EntanglerBlock([(q, q + 1) for q in range(n_qubits - 1)])


def random_entangler(n_qubits, seed):
    """Random block of n-1 distinct CNOTs with control below target.

    Targets are drawn uniformly from qubits 1..n-1 and controls uniformly
    below the target; exact duplicates are redrawn.
    """
    if n_qubits < 2:
        raise ValueError("need at least two qubits")
    rng = np.random.default_rng(seed)
    cnots = []
    seen = set()
    while len(cnots) < n_qubits - 1:
        t = int(rng.integers(1, n_qubits))
        c = int(rng.integers(0, t))
        if (c, t) in seen:
            continue
        seen.add((c, t))
        cnots.append((c, t))
    return EntanglerBlock(cnots)


@dataclass
class CircuitSpec:
    """R_Y/CNOT circuit: an initial rotation layer on every qubit, then
    ``depth`` repetitions of the entangler block, each followed by R_Y
    rotations on the qubits the block touches.

    ``gates`` lists ("ry", qubit, parameter_index) and
    ("cx", control, target) tuples in application order.
    """

    n_qubits: int
    depth: int
    block: EntanglerBlock
    gates: list = field(default_factory=list)
    parameter_count: int = 0
    cnot_count: int = 0


def build_circuit(block, n_qubits, depth, rotations="touched"):
    """Assemble the circuit for a block at a given depth.

    Parameters are ordered with the initial layer first (ascending qubit)
    and then each block's rotation layer (ascending qubit). The "all"
    rotation mode rotates every qubit after each block instead of only the
    touched ones.
    """
    if depth < 1:
        raise ValueError(f"depth must be at least 1, got {depth}")
    if rotations not in ("touched", "all"):
        raise ValueError(f"unknown rotation placement {rotations!r}")
    touched = block.touched_qubits()
    for q in touched:
        if q >= n_qubits:
            raise ValueError(f"block touches qubit {q} outside [0, {n_qubits})")
    layer = touched if rotations == "touched" else list(range(n_qubits))

    gates = []
    pidx = 0
    for q in range(n_qubits):
        gates.append(("ry", q, pidx))
        pidx += 1
    for _ in range(depth):
        for c, t in block.cnots:
            gates.append(("cx", c, t))
        for q in layer:
            gates.append(("ry", q, pidx))
            pidx += 1
    return CircuitSpec(
        n_qubits=n_qubits,
        depth=depth,
        block=block,
        gates=gates,
        parameter_count=pidx,
        cnot_count=depth * len(block.cnots),
    )


def save_sequence(obj, path, n_qubits=None, provenance=""):
    """Serialize a ParentSequence or EntanglerBlock as a JSON document."""
    if isinstance(obj, ParentSequence):
        doc = {
            "kind": "parent_sequence",
            "n_qubits": obj.n_qubits,
            "mu": obj.mu,
            "reduced": obj.reduced,
            "provenance": obj.provenance,
            "pairs": [list(p) for p in obj.pairs],
        }
    elif isinstance(obj, EntanglerBlock):
        if n_qubits is None:
            raise ValueError("blocks need an explicit n_qubits to serialize")
        doc = {
            "kind": "entangler_block",
            "n_qubits": n_qubits,
            "provenance": provenance,
            "cnots": [list(c) for c in obj.cnots],
        }
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_sequence(path):
    """Load a sequence document; returns (object, n_qubits)."""
    with open(path) as fh:
        doc = json.load(fh)
    kind = doc.get("kind")
    if kind == "parent_sequence":
        seq = ParentSequence(
            n_qubits=int(doc["n_qubits"]),
            pairs=[tuple(p) for p in doc["pairs"]],
            mu=float(doc["mu"]),
            reduced=bool(doc.get("reduced", False)),
            provenance=str(doc.get("provenance", "")),
        )
        return seq, seq.n_qubits
    if kind == "entangler_block":
        return (EntanglerBlock([tuple(c) for c in doc["cnots"]]),
                int(doc["n_qubits"]))
    raise ValueError(f"{path}: unknown sequence kind {kind!r}")
