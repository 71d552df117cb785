"""Jordan-Wigner mapping of spatial-orbital integrals to qubit operators.

Conventions, used consistently across the package:

* Spin orbitals are blocked: qubit ``p`` carries the alpha spin orbital of
  spatial orbital ``p`` and qubit ``M + p`` the beta one, for M spatial
  orbitals (``n = 2M`` qubits).
* Basis states are indexed so that bit ``q`` (qubit 0 = least significant
  bit) is the occupation of spin orbital ``q``.
* A Pauli word is a string over ``IXYZ`` whose character ``k`` acts on
  qubit ``k``.
* Ladder operators carry the phase string on lower qubits:
  ``a^dag_p = (prod_{k<p} Z_k)(X_p - iY_p)/2``.

Internally operators are accumulated in symplectic form, ``c * X^x Z^z``
with integer bit masks ``x`` and ``z``; a site with both bits set is a Y up
to a phase. Products then reduce to mask XORs and sign bookkeeping, which
keeps Hamiltonian construction exact (no rounding beyond the input
integrals) and fast.
"""

import numpy as np

__all__ = [
    "PauliHamiltonian",
    "act_ladder",
    "build_hamiltonian",
    "determinant_state_index",
    "jw_ladder_operator",
    "pauli_word_matrix",
    "spin_orbital_index",
]

IMAG_TOL = 1e-12
COEFF_CUTOFF = 1e-14

_SINGLE = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def spin_orbital_index(p, spin, n_spatial, spin_order="blocked"):
    """Qubit index of spatial orbital p with spin 0 (alpha) or 1 (beta)."""
    if spin_order != "blocked":
        raise ValueError(f"unsupported spin ordering {spin_order!r}")
    if not 0 <= p < n_spatial:
        raise IndexError(f"spatial orbital {p} outside [0, {n_spatial})")
    if spin not in (0, 1):
        raise ValueError(f"spin must be 0 or 1, got {spin}")
    return p + spin * n_spatial


def _ladder_xz(q, dagger):
    """Two symplectic terms of a ladder operator on qubit q."""
    x = 1 << q
    zlow = x - 1
    sign = 0.5 if dagger else -0.5
    return ((x, zlow, 0.5), (x, zlow | x, sign))


def _mul_xz(x1, z1, c1, x2, z2, c2):
    # Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1
    sign = -1.0 if (z1 & x2).bit_count() % 2 else 1.0
    return x1 ^ x2, z1 ^ z2, c1 * c2 * sign


def _accumulate_ladder_product(acc, ops, coeff):
    """Add coeff * (product of ladder ops, leftmost first) into acc."""
    terms = [(0, 0, coeff)]
    for q, dagger in ops:
        new_terms = []
        for x1, z1, c1 in terms:
            for x2, z2, c2 in _ladder_xz(q, dagger):
                new_terms.append(_mul_xz(x1, z1, c1, x2, z2, c2))
        terms = new_terms
    for x, z, c in terms:
        key = (x, z)
        acc[key] = acc.get(key, 0.0) + c


def _mask_to_word(x, z, n):
    chars = []
    for k in range(n):
        bit = 1 << k
        xk, zk = bool(x & bit), bool(z & bit)
        chars.append("Y" if (xk and zk) else "X" if xk else "Z" if zk else "I")
    return "".join(chars)


def _word_to_mask(word):
    x = z = 0
    ny = 0
    for k, ch in enumerate(word):
        bit = 1 << k
        if ch == "X":
            x |= bit
        elif ch == "Z":
            z |= bit
        elif ch == "Y":
            x |= bit
            z |= bit
            ny += 1
        elif ch != "I":
            raise ValueError(f"invalid Pauli character {ch!r}")
    return x, z, ny


def pauli_word_matrix(word):
    """Dense matrix of a Pauli word (qubit 0 = least significant bit)."""
    out = np.array([[1.0 + 0j]])
    for ch in word:
        out = np.kron(_SINGLE[ch], out)
    return out


class PauliHamiltonian:
    """Real-coefficient sum of Pauli words.

    Term order is canonical (sorted by word), so two Hamiltonians built from
    the same integrals compare equal term by term. ``apply``/``expectation``
    group terms by their qubit-flip pattern: all words sharing an X-type
    mask act as one diagonal vector followed by one index permutation, which
    is what makes repeated energy evaluation on statevectors cheap.
    """

    def __init__(self, n_qubits, terms):
        self.n_qubits = n_qubits
        self.terms = sorted(
            ((float(c), w) for c, w in terms), key=lambda t: t[1])
        for _, w in self.terms:
            if len(w) != n_qubits:
                raise ValueError(
                    f"word {w!r} does not span {n_qubits} qubits")
        self._groups = None

    def __len__(self):
        return len(self.terms)

    def matrix(self):
        """Dense Hermitian matrix; intended for small qubit counts."""
        dim = 1 << self.n_qubits
        out = np.zeros((dim, dim), dtype=complex)
        for c, w in self.terms:
            out += c * pauli_word_matrix(w)
        return out

    def _grouped(self):
        if self._groups is not None:
            return self._groups
        dim = 1 << self.n_qubits
        basis = np.arange(dim, dtype=np.uint64)
        by_x = {}
        for c, w in self.terms:
            x, z, ny = _word_to_mask(w)
            # matrix of the word is i^ny * X^x Z^z
            factor = c * (1j ** ny)
            by_x.setdefault(x, []).append((z, factor))
        groups = []
        for x, items in sorted(by_x.items()):
            is_real = all(abs(f.imag) < 1e-15 for _, f in items)
            dtype = float if is_real else complex
            diag = np.zeros(dim, dtype=dtype)
            for z, factor in items:
                par = np.bitwise_count(basis & np.uint64(z)) & 1
                sign = 1.0 - 2.0 * par.astype(dtype)
                diag += (factor.real if is_real else factor) * sign
            groups.append((np.uint64(x), diag))
        self._groups = groups
        return groups

    def apply(self, vec):
        """Return H @ vec for a length 2**n statevector."""
        groups = self._grouped()
        dim = 1 << self.n_qubits
        vec = np.asarray(vec)
        if vec.shape != (dim,):
            raise ValueError(f"statevector must have length {dim}")
        complex_groups = any(d.dtype.kind == "c" for _, d in groups)
        dtype = np.result_type(vec.dtype,
                               complex if complex_groups else float)
        out = np.zeros(dim, dtype=dtype)
        basis = np.arange(dim, dtype=np.uint64)
        for x, diag in groups:
            if x == 0:
                out += diag * vec
            else:
                out += (diag * vec)[basis ^ x]
        return out

    def expectation(self, vec):
        """Real expectation value <vec|H|vec>."""
        val = np.vdot(vec, self.apply(vec))
        return float(np.real(val))


def jw_ladder_operator(q, n_qubits, dagger):
    """Ladder operator on spin orbital q as two weighted Pauli words."""
    if not 0 <= q < n_qubits:
        raise IndexError(f"spin orbital {q} outside [0, {n_qubits})")
    out = []
    for x, z, c in _ladder_xz(q, dagger):
        ny = (x & z).bit_count()
        out.append((c * ((-1j) ** ny), _mask_to_word(x, z, n_qubits)))
    return out


def build_hamiltonian(integrals, spin_order="blocked"):
    """Qubit Hamiltonian of an :class:`~qmivqe.fcidump.IntegralSet`.

    H = E_core + sum_{pq,s} h[p,q] a^dag_{ps} a_{qs}
        + 1/2 sum_{pqrs,st} (pq|rs) a^dag_{ps} a^dag_{rt} a_{st} a_{qs},
    with chemists'-notation integrals expanded over both spins. Coefficients
    are real by construction; an imaginary residue above 1e-12 raises, and
    words below 1e-14 in magnitude are dropped.
    """
    if spin_order != "blocked":
        raise ValueError(f"unsupported spin ordering {spin_order!r}")
    m = integrals.n_orbitals
    n = 2 * m
    g = integrals.eri_dense()
    acc = {}

    for p in range(m):
        for q in range(m):
            hpq = integrals.h[p, q]
            if hpq == 0.0:
                continue
            for spin in (0, 1):
                ps = p + spin * m
                qs = q + spin * m
                _accumulate_ladder_product(
                    acc, ((ps, True), (qs, False)), hpq)

    for p in range(m):
        for q in range(m):
            for r in range(m):
                for s in range(m):
                    val = g[p, q, r, s]
                    if val == 0.0:
                        continue
                    for s1 in (0, 1):
                        for s2 in (0, 1):
                            ps = p + s1 * m
                            qs = q + s1 * m
                            rs = r + s2 * m
                            ss = s + s2 * m
                            if ps == rs or qs == ss:
                                continue
                            _accumulate_ladder_product(
                                acc,
                                ((ps, True), (rs, True),
                                 (ss, False), (qs, False)),
                                0.5 * val)

    terms = [(integrals.core_energy, "I" * n)]
    for (x, z), c in acc.items():
        if c == 0.0:
            continue
        ny = (x & z).bit_count()
        coeff = c * ((-1j) ** ny)
        if abs(coeff.imag) > IMAG_TOL:
            raise ValueError(
                f"imaginary coefficient {coeff.imag:.3e} on word "
                f"{_mask_to_word(x, z, n)}; integrals are not real-symmetric")
        if x == 0 and z == 0:
            terms[0] = (terms[0][0] + coeff.real, "I" * n)
        elif abs(coeff.real) >= COEFF_CUTOFF:
            terms.append((coeff.real, _mask_to_word(x, z, n)))
    return PauliHamiltonian(n, terms)


def act_ladder(mask, q, dagger):
    """Apply a ladder operator to an occupation bit mask.

    Returns (phase, new_mask) or None when the state is annihilated. The
    phase is the parity of occupied spin orbitals below q.
    """
    bit = 1 << q
    occupied = bool(mask & bit)
    if dagger == occupied:
        return None
    phase = -1.0 if (mask & (bit - 1)).bit_count() % 2 else 1.0
    return phase, mask ^ bit


def determinant_state_index(occupied, n_qubits):
    """Basis index and phase of a creation-ordered determinant.

    ``occupied`` lists spin orbitals in the order their creation operators
    act on the vacuum (leftmost first). The canonical basis state applies
    them in descending qubit order, so the phase is the sign of the
    permutation that sorts ``occupied`` descending.
    """
    occupied = list(occupied)
    if len(set(occupied)) != len(occupied):
        raise ValueError(f"repeated spin orbital in {occupied}")
    index = 0
    for q in occupied:
        if not 0 <= q < n_qubits:
            raise IndexError(f"spin orbital {q} outside [0, {n_qubits})")
        index |= 1 << q
    inversions = sum(
        1
        for k in range(len(occupied))
        for l in range(k + 1, len(occupied))
        if occupied[k] < occupied[l])
    return index, (-1.0 if inversions % 2 else 1.0)
