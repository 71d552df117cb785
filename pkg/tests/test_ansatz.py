"""Entangler selection, orderings, baselines, and circuit assembly."""

import math
from collections import Counter

import numpy as np
import pytest

from qmivqe.ansatz import (CircuitSpec, EntanglerBlock, ParentSequence,
                           build_circuit, enumerate_permutations, ladder,
                           load_sequence, permute, random_entangler,
                           reduce_first_spot, save_sequence, threshold_pairs)
from qmivqe.states import QmiMatrix


def make_qmi(normalized):
    normalized = np.asarray(normalized, dtype=float)
    return QmiMatrix(normalized.shape[0], normalized.copy(), normalized,
                     "max")


def random_qmi(rng, n):
    raw = np.abs(rng.normal(size=(n, n)))
    raw = np.triu(raw, 1)
    raw = raw + raw.T
    mx = raw.max()
    return QmiMatrix(n, raw, raw / mx, "max")


def test_threshold_is_strict():
    qmi = make_qmi([[0.0, 0.9, 0.4],
                    [0.9, 0.0, 0.6],
                    [0.4, 0.6, 0.0]])
    parent = threshold_pairs(qmi, 0.5)
    assert parent.pairs == [(0, 1), (1, 2)]
    assert parent.mu == 0.5
    assert not parent.reduced
    assert threshold_pairs(qmi, 0.6).pairs == [(0, 1)]
    assert threshold_pairs(qmi, 0.0).pairs == [(0, 1), (0, 2), (1, 2)]


def test_threshold_rejects_bad_mu():
    qmi = make_qmi(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        threshold_pairs(qmi, 1.0)
    with pytest.raises(ValueError):
        threshold_pairs(qmi, -0.1)


def test_threshold_monotone_in_mu():
    rng = np.random.default_rng(53)
    for _ in range(20):
        n = int(rng.integers(3, 9))
        qmi = random_qmi(rng, n)
        lo, hi = sorted(rng.uniform(0.0, 0.99, size=2).tolist())
        wide = set(threshold_pairs(qmi, lo).pairs)
        narrow = set(threshold_pairs(qmi, hi).pairs)
        assert narrow <= wide


def test_parent_sequence_validation():
    with pytest.raises(ValueError, match="duplicate"):
        ParentSequence(4, [(0, 1), (0, 1)], 0.5)
    with pytest.raises(ValueError):
        ParentSequence(4, [(1, 0)], 0.5)
    with pytest.raises(ValueError):
        ParentSequence(4, [(0, 4)], 0.5)
    with pytest.raises(ValueError):
        ParentSequence(4, [(0, 1)], 1.0)
    parent = ParentSequence(4, [(2, 3), (0, 1)], 0.5)
    assert parent.pairs == [(0, 1), (2, 3)]


def test_reduce_keeps_first_partner_per_row():
    parent = ParentSequence(8, [(1, 5), (1, 7), (5, 7)], 0.5,
                            provenance="demo")
    reduced = reduce_first_spot(parent)
    assert reduced.pairs == [(1, 5), (5, 7)]
    assert reduced.reduced
    assert reduced.provenance == "demo reduced"


def test_reduce_is_subset_with_unique_rows():
    rng = np.random.default_rng(59)
    for _ in range(20):
        n = int(rng.integers(3, 10))
        qmi = random_qmi(rng, n)
        parent = threshold_pairs(qmi, 0.3)
        if not parent.pairs:
            continue
        reduced = reduce_first_spot(parent)
        assert set(reduced.pairs) <= set(parent.pairs)
        rows = [i for i, _ in reduced.pairs]
        assert len(rows) == len(set(rows))
        for i, j in reduced.pairs:
            partners = [jj for ii, jj in parent.pairs if ii == i]
            assert j == min(partners)


def test_permute_reproducible_and_preserves_pairs():
    parent = ParentSequence(6, [(0, 1), (1, 2), (2, 3), (3, 4)], 0.5)
    block_a = permute(parent, 123)
    block_b = permute(parent, 123)
    assert block_a.cnots == block_b.cnots
    assert sorted(block_a.cnots) == parent.pairs


def test_permute_orderings_are_uniform():
    pairs = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)]
    parent = ParentSequence(6, pairs, 0.5)
    n_draws = 10000
    counts = Counter()
    for seed in range(n_draws):
        counts[tuple(permute(parent, seed).cnots)] += 1
    n_orderings = math.factorial(len(pairs))
    assert len(counts) == n_orderings
    expected = n_draws / n_orderings
    sigma = math.sqrt(n_draws * (1 / n_orderings) * (1 - 1 / n_orderings))
    worst = max(abs(c - expected) for c in counts.values())
    assert worst <= 5 * sigma


def test_permute_rejects_empty_parent():
    parent = ParentSequence(4, [], 0.5)
    with pytest.raises(ValueError, match="empty"):
        permute(parent, 0)
    with pytest.raises(ValueError, match="empty"):
        enumerate_permutations(parent)


def test_enumerate_permutations_small_counts():
    single = ParentSequence(4, [(0, 1)], 0.5)
    assert [b.cnots for b in enumerate_permutations(single)] == [[(0, 1)]]
    two = ParentSequence(4, [(0, 1), (2, 3)], 0.5)
    blocks = enumerate_permutations(two)
    assert [b.cnots for b in blocks] == [[(0, 1), (2, 3)],
                                         [(2, 3), (0, 1)]]
    three = ParentSequence(4, [(0, 1), (1, 2), (2, 3)], 0.5)
    assert len(enumerate_permutations(three)) == 6


def test_enumerate_permutations_limit():
    pairs = [(0, j) for j in range(1, 9)]
    parent = ParentSequence(10, pairs, 0.5)
    with pytest.raises(ValueError, match="limit"):
        enumerate_permutations(parent)
    assert len(enumerate_permutations(parent, limit=50000)) == 40320


def test_ladder_layout():
    block = ladder(4)
    assert block.cnots == [(0, 1), (1, 2), (2, 3)]
    assert block.touched_qubits() == [0, 1, 2, 3]
    with pytest.raises(ValueError):
        ladder(1)


def test_random_entangler_two_qubits():
    for seed in range(5):
        assert random_entangler(2, seed).cnots == [(0, 1)]


def test_random_entangler_distribution():
    for seed in range(10000):
        block = random_entangler(6, seed)
        assert len(block.cnots) == 5
        assert len(set(block.cnots)) == 5
        for c, t in block.cnots:
            assert 0 <= c < t < 6
    assert random_entangler(6, 77).cnots == random_entangler(6, 77).cnots


def test_entangler_block_validation():
    with pytest.raises(ValueError):
        EntanglerBlock([(2, 2)])
    block = EntanglerBlock([(3, 1), (0, 2)])
    assert block.touched_qubits() == [0, 1, 2, 3]


def test_build_circuit_counts_for_dense_four_qubit_block():
    pairs = [(0, 1), (0, 4), (0, 5), (1, 4), (1, 5), (4, 5)]
    block = EntanglerBlock(pairs)
    shallow = build_circuit(block, 8, 1)
    assert shallow.parameter_count == 12
    assert shallow.cnot_count == 6
    deep = build_circuit(block, 8, 3)
    assert deep.parameter_count == 20
    assert deep.cnot_count == 18


def test_build_circuit_counts_for_ladders():
    twelve = build_circuit(ladder(12), 12, 4)
    assert twelve.cnot_count == 44
    assert twelve.parameter_count == 60
    fourteen = build_circuit(ladder(14), 14, 4)
    assert fourteen.cnot_count == 52
    assert fourteen.parameter_count == 70


def test_build_circuit_gate_order():
    block = EntanglerBlock([(1, 3), (0, 2)])
    circuit = build_circuit(block, 4, 2)
    gates = circuit.gates
    assert [g for g in gates[:4]] == [("ry", q, q) for q in range(4)]
    assert gates[4] == ("cx", 1, 3)
    assert gates[5] == ("cx", 0, 2)
    assert [g[0] for g in gates[6:10]] == ["ry"] * 4
    assert [g[1] for g in gates[6:10]] == [0, 1, 2, 3]
    indices = [g[2] for g in gates if g[0] == "ry"]
    assert indices == list(range(circuit.parameter_count))


def test_build_circuit_rotate_all_mode():
    block = EntanglerBlock([(0, 1)])
    touched = build_circuit(block, 5, 2)
    assert touched.parameter_count == 5 + 2 * 2
    everything = build_circuit(block, 5, 2, rotations="all")
    assert everything.parameter_count == 5 + 2 * 5
    with pytest.raises(ValueError):
        build_circuit(block, 5, 2, rotations="none")


def test_build_circuit_random_block_bookkeeping():
    rng = np.random.default_rng(61)
    for _ in range(25):
        n = int(rng.integers(2, 9))
        depth = int(rng.integers(1, 5))
        block = random_entangler(n, int(rng.integers(0, 1 << 30)))
        circuit = build_circuit(block, n, depth)
        touched = len(block.touched_qubits())
        assert circuit.parameter_count == n + depth * touched
        assert circuit.cnot_count == depth * len(block.cnots)
        assert isinstance(circuit, CircuitSpec)


def test_build_circuit_validation():
    block = EntanglerBlock([(0, 3)])
    with pytest.raises(ValueError, match="depth"):
        build_circuit(block, 4, 0)
    with pytest.raises(ValueError, match="outside"):
        build_circuit(block, 3, 1)


def test_sequence_json_round_trip(tmp_path):
    parent = ParentSequence(8, [(0, 1), (1, 4)], 0.5, reduced=True,
                            provenance="round trip")
    path = tmp_path / "parent.json"
    save_sequence(parent, path)
    loaded, n = load_sequence(path)
    assert n == 8
    assert loaded.pairs == parent.pairs
    assert loaded.mu == parent.mu
    assert loaded.reduced is True
    assert loaded.provenance == "round trip"

    block = EntanglerBlock([(4, 2), (0, 1)])
    path = tmp_path / "block.json"
    save_sequence(block, path, n_qubits=6, provenance="ordered")
    loaded, n = load_sequence(path)
    assert n == 6
    assert loaded.cnots == [(4, 2), (0, 1)]


def test_sequence_serialization_errors(tmp_path):
    block = EntanglerBlock([(0, 1)])
    with pytest.raises(ValueError, match="n_qubits"):
        save_sequence(block, tmp_path / "x.json")
    with pytest.raises(TypeError):
        save_sequence({"pairs": []}, tmp_path / "y.json")
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "mystery"}\n')
    with pytest.raises(ValueError, match="kind"):
        load_sequence(bad)
