"""Reference statevectors, reduced density matrices and mutual information.

States live in the full 2**n qubit space with the bit conventions of the
encoding module. The mutual-information matrix is computed between qubits
(spin orbitals), using natural-log entropies of one- and two-qubit reduced
density matrices.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from .encoding import act_ladder

__all__ = [
    "QmiMatrix",
    "Statevector",
    "fci_ground_state",
    "hf_statevector",
    "mp2_statevector",
    "one_qubit_rdm",
    "qmi_matrix",
    "two_qubit_rdm",
    "von_neumann_entropy",
]

ENTROPY_EIGENVALUE_FLOOR = 1e-14
QMI_NEGATIVE_TOL = 1e-10
DENSE_SECTOR_LIMIT = 4096


@dataclass
class Statevector:
    """Normalized amplitudes over 2**n_qubits computational basis states."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"amplitude vector must have length {1 << self.n_qubits}")

    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self):
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero vector")
        return Statevector(self.n_qubits, self.amplitudes / n)


def hf_statevector(n_spatial, n_electrons):
    """Aufbau determinant with the lowest N/2 spatial orbitals doubly filled.

    N = 0 is allowed and gives the vacuum state.
    """
    if n_electrons % 2:
        raise ValueError(
            f"closed-shell determinant needs even electron count, "
            f"got {n_electrons}")
    if not 0 <= n_electrons <= 2 * n_spatial:
        raise ValueError(
            f"electron count {n_electrons} outside [0, {2 * n_spatial}]")
    n = 2 * n_spatial
    nocc = n_electrons // 2
    mask = 0
    for p in range(nocc):
        mask |= (1 << p) | (1 << (n_spatial + p))
    amp = np.zeros(1 << n, dtype=complex)
    amp[mask] = 1.0
    return Statevector(n, amp)


def mp2_statevector(amplitudes):
    """Normalized first-order doubles expansion on top of the determinant.

    Each stored amplitude adds t * a^dag_a a^dag_b a_j a_i |HF> with the
    Jordan-Wigner phases of the sequential ladder applications.
    """
    m = amplitudes.n_orbitals
    n = 2 * m
    hf = hf_statevector(m, amplitudes.n_electrons)
    vec = hf.amplitudes.copy()
    hf_mask = int(np.flatnonzero(vec)[0])
    for (i, j, a, b), t in amplitudes.t.items():
        mask = hf_mask
        phase = 1.0
        for q, dagger in ((i, False), (j, False), (b, True), (a, True)):
            step = act_ladder(mask, q, dagger)
            if step is None:
                phase = 0.0
                break
            ph, mask = step
            phase *= ph
        if phase:
            vec[mask] += t * phase
    return Statevector(n, vec).normalized()


def _sector_masks(n_qubits, n_electrons):
    m = n_qubits // 2
    nocc = n_electrons // 2
    from itertools import combinations

    singles = []
    for occ in combinations(range(m), nocc):
        mask = 0
        for p in occ:
            mask |= 1 << p
        singles.append(mask)
    masks = sorted((a | (b << m)) for a in singles for b in singles)
    return np.array(masks, dtype=np.uint64)


def fci_ground_state(hamiltonian, n_electrons):
    """Ground energy and state in the closed-shell particle-number sector.

    Diagonalizes within basis states carrying N/2 occupations in each spin
    block: dense for small sectors, Lanczos (ARPACK, deterministic all-ones
    start) for larger ones. Limited to 16 qubits.
    """
    n = hamiltonian.n_qubits
    if n > 16:
        raise ValueError(f"{n} qubits exceed the 16-qubit exact-solver limit")
    if n % 2:
        raise ValueError(f"need an even qubit count, got {n}")
    if n_electrons % 2 or not 0 < n_electrons <= n:
        raise ValueError(
            f"unsupported electron count {n_electrons} for {n} qubits")
    masks = _sector_masks(n, n_electrons)
    dim = len(masks)

    if dim <= DENSE_SECTOR_LIMIT:
        ham = np.zeros((dim, dim))
        cols = np.arange(dim)
        for x, diag in hamiltonian._grouped():
            if diag.dtype.kind == "c":
                raise ValueError("sector solver expects a real Hamiltonian")
            partner = masks ^ x
            pos = np.searchsorted(masks, partner)
            pos_clip = np.minimum(pos, dim - 1)
            valid = masks[pos_clip] == partner
            ham[pos_clip[valid], cols[valid]] += diag[masks[valid]]
        evals, evecs = np.linalg.eigh(ham)
        energy = float(evals[0])
        ground = evecs[:, 0]
    else:
        full_dim = 1 << n

        def matvec(v):
            full = np.zeros(full_dim)
            full[masks] = v
            return hamiltonian.apply(full)[masks]

        op = LinearOperator((dim, dim), matvec=matvec, dtype=float)
        v0 = np.full(dim, 1.0 / math.sqrt(dim))
        evals, evecs = eigsh(op, k=1, which="SA", v0=v0)
        energy = float(evals[0])
        ground = evecs[:, 0]

    # Fix the arbitrary eigenvector sign deterministically.
    lead = np.argmax(np.abs(ground))
    if ground[lead] < 0:
        ground = -ground
    amp = np.zeros(1 << n, dtype=complex)
    amp[masks] = ground
    return energy, Statevector(n, amp)


def _traced_axes(n, targets):
    return [n - 1 - q for q in targets]


def one_qubit_rdm(state, i):
    """2x2 reduced density matrix of qubit i."""
    n = state.n_qubits
    if not 0 <= i < n:
        raise IndexError(f"qubit {i} outside [0, {n})")
    psi = state.amplitudes.reshape((2,) * n)
    psi = np.moveaxis(psi, _traced_axes(n, [i]), [0]).reshape(2, -1)
    return psi @ psi.conj().T


def two_qubit_rdm(state, i, j):
    """4x4 reduced density matrix of qubits (i, j); basis index 2*n_i + n_j."""
    n = state.n_qubits
    if i == j:
        raise ValueError("need two distinct qubits")
    for q in (i, j):
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} outside [0, {n})")
    psi = state.amplitudes.reshape((2,) * n)
    psi = np.moveaxis(psi, _traced_axes(n, [i, j]), [0, 1]).reshape(4, -1)
    return psi @ psi.conj().T


def von_neumann_entropy(rho):
    """Entropy -sum(l ln l) of a density matrix, in nats."""
    rho = np.asarray(rho)
    if abs(np.trace(rho).real - 1.0) > 1e-8:
        raise ValueError(f"density matrix trace {np.trace(rho)} is not 1")
    evals = np.linalg.eigvalsh((rho + rho.conj().T) / 2.0)
    evals = evals[evals > ENTROPY_EIGENVALUE_FLOOR]
    return float(-np.sum(evals * np.log(evals)))


@dataclass
class QmiMatrix:
    """Pairwise mutual information between qubits.

    ``raw`` is in nats; ``normalized`` divides by the maximum off-diagonal
    entry (mode "max", the default) or by 2 ln 2 (mode "ln4").
    """

    n_qubits: int
    raw: np.ndarray
    normalized: np.ndarray
    normalization_mode: str

    def to_csv(self, path):
        """Write pair rows ``i,j,raw,normalized`` for i < j, 0-based."""
        lines = ["i,j,raw,normalized"]
        for i in range(self.n_qubits):
            for j in range(i + 1, self.n_qubits):
                lines.append(f"{i},{j},{self.raw[i, j]:.11e},"
                             f"{self.normalized[i, j]:.11e}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def from_csv(cls, path):
        import csv

        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError(f"{path}: no mutual-information rows")
        n_pairs = len(rows)
        n = int(round((1 + math.sqrt(1 + 8 * n_pairs)) / 2))
        if n * (n - 1) // 2 != n_pairs:
            raise ValueError(
                f"{path}: {n_pairs} rows do not form a full pair triangle")
        raw = np.zeros((n, n))
        normalized = np.zeros((n, n))
        seen = set()
        for row in rows:
            i, j = int(row["i"]), int(row["j"])
            if not (0 <= i < j < n) or (i, j) in seen:
                raise ValueError(f"{path}: bad pair ({i}, {j})")
            seen.add((i, j))
            raw[i, j] = raw[j, i] = float(row["raw"])
            normalized[i, j] = normalized[j, i] = float(row["normalized"])
        return cls(n, raw, normalized, "file")


def qmi_matrix(state, normalization="max"):
    """Mutual-information matrix I(i,j) = S(i) + S(j) - S(i,j) of a state."""
    if normalization not in ("max", "ln4"):
        raise ValueError(f"unknown normalization mode {normalization!r}")
    n = state.n_qubits
    s1 = [von_neumann_entropy(one_qubit_rdm(state, i)) for i in range(n)]
    raw = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            s12 = von_neumann_entropy(two_qubit_rdm(state, i, j))
            val = s1[i] + s1[j] - s12
            if val < -QMI_NEGATIVE_TOL:
                raise ValueError(
                    f"mutual information for ({i}, {j}) is {val:.3e}; "
                    "state amplitudes are inconsistent")
            raw[i, j] = raw[j, i] = max(val, 0.0)
    if normalization == "max":
        mx = raw.max()
        normalized = raw / mx if mx > 0 else np.zeros_like(raw)
    else:
        normalized = raw / (2.0 * math.log(2.0))
    return QmiMatrix(n, raw, normalized, normalization)
