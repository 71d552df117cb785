"""Natural orbitals of a correlated state and basis-change machinery.

The spin-summed spatial one-body density is diagonalized to get natural
orbitals; integrals transform with the orbital-rotation matrix, and
statevectors are transported by the second-quantized one-body generator so
energies are covariant between the two routes.
"""

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.sparse.linalg import expm_multiply

from .fcidump import IntegralSet
from .states import Statevector

__all__ = [
    "natural_orbitals",
    "one_body_rdm_spatial",
    "rotate_statevector",
    "transform_integrals",
]

SYMMETRY_TOL = 1e-8
ORTHOGONALITY_TOL = 1e-10
DEGENERACY_TOL = 1e-10


def _excitation_action(n, p, q, vec):
    """Apply a^dag_p a_q (spin-orbital indices) to a full statevector."""
    dim = 1 << n
    basis = np.arange(dim, dtype=np.uint64)
    if p == q:
        occ = (basis >> np.uint64(q)) & np.uint64(1)
        return vec * occ.astype(vec.dtype)
    bp = np.uint64(1 << p)
    bq = np.uint64(1 << q)
    valid = ((basis & bq) != 0) & ((basis & bp) == 0)
    src = basis[valid]
    inter = src ^ bq
    phase = (np.bitwise_count(src & np.uint64((1 << q) - 1))
             + np.bitwise_count(inter & np.uint64((1 << p) - 1))) & 1
    sign = 1.0 - 2.0 * phase.astype(float)
    out = np.zeros_like(vec)
    out[inter ^ bp] = sign * vec[src]
    return out


def one_body_rdm_spatial(state):
    """Spin-summed density D[p,q] = sum_s <psi| a^dag_{ps} a_{qs} |psi>."""
    n = state.n_qubits
    if n % 2:
        raise ValueError(f"need an even qubit count, got {n}")
    m = n // 2
    vec = state.amplitudes
    d = np.zeros((m, m), dtype=complex)
    for p in range(m):
        for q in range(m):
            acc = 0.0
            for spin in (0, 1):
                ps, qs = p + spin * m, q + spin * m
                acc += np.vdot(vec, _excitation_action(n, ps, qs, vec))
            d[p, q] = acc
    if np.max(np.abs(d.imag)) < 1e-12:
        return d.real.copy()
    return d


def natural_orbitals(density):
    """Occupations (descending) and orbital columns of a spatial density.

    Deterministic conventions: occupations sort descending; occupations
    equal within 1e-10 order their orbitals by the index of the largest
    magnitude component; each column's largest component is made positive;
    finally the determinant is fixed to +1 by flipping the last column.
    """
    d = np.asarray(density)
    if np.max(np.abs(d - d.T.conj())) > SYMMETRY_TOL:
        raise ValueError("density matrix is not symmetric within 1e-8")
    d = np.real((d + d.T.conj()) / 2.0)
    occ, vecs = np.linalg.eigh(d)
    order = np.argsort(-occ, kind="stable")
    occ = occ[order]
    vecs = vecs[:, order]

    # Reorder nearly degenerate blocks by dominant-component index.
    start = 0
    m = len(occ)
    while start < m:
        stop = start + 1
        while stop < m and abs(occ[stop] - occ[start]) <= DEGENERACY_TOL:
            stop += 1
        if stop - start > 1:
            block = vecs[:, start:stop]
            dominant = np.argmax(np.abs(block), axis=0)
            sub = np.argsort(dominant, kind="stable")
            vecs[:, start:stop] = block[:, sub]
            occ[start:stop] = occ[start:stop][sub]
        start = stop

    for k in range(m):
        lead = np.argmax(np.abs(vecs[:, k]))
        if vecs[lead, k] < 0:
            vecs[:, k] = -vecs[:, k]
    if np.linalg.det(vecs) < 0:
        vecs[:, -1] = -vecs[:, -1]
    return occ, vecs


def transform_integrals(integrals, rotation):
    """Integrals in the orbital basis defined by ``rotation`` columns."""
    u = np.asarray(rotation, dtype=float)
    m = integrals.n_orbitals
    if u.shape != (m, m):
        raise ValueError(f"rotation has shape {u.shape}, expected ({m}, {m})")
    if np.max(np.abs(u.T @ u - np.eye(m))) > ORTHOGONALITY_TOL:
        raise ValueError("rotation matrix is not orthogonal within 1e-10")
    h = u.T @ integrals.h @ u
    g = integrals.eri_dense()
    g = np.einsum("pi,pqrs->iqrs", u, g)
    g = np.einsum("qj,iqrs->ijrs", u, g)
    g = np.einsum("rk,ijrs->ijks", u, g)
    g = np.einsum("sl,ijks->ijkl", u, g)
    return IntegralSet.from_dense(
        h, g, integrals.core_energy, integrals.n_electrons, integrals.ms2,
        source_label=f"{integrals.source_label} NO")


def _one_body_generator(n, kappa):
    """Sparse matrix of sum_{pq,s} kappa[p,q] a^dag_{ps} a_{qs}."""
    m = n // 2
    dim = 1 << n
    basis = np.arange(dim, dtype=np.uint64)
    rows, cols, vals = [], [], []
    for p in range(m):
        for q in range(m):
            if abs(kappa[p, q]) < 1e-16:
                continue
            for spin in (0, 1):
                ps, qs = p + spin * m, q + spin * m
                bp = np.uint64(1 << ps)
                bq = np.uint64(1 << qs)
                valid = ((basis & bq) != 0) & ((basis & bp) == 0)
                src = basis[valid]
                inter = src ^ bq
                parity = (np.bitwise_count(src & np.uint64((1 << qs) - 1))
                          + np.bitwise_count(inter & np.uint64((1 << ps) - 1))
                          ) & 1
                sign = 1.0 - 2.0 * parity.astype(float)
                rows.append((inter ^ bp).astype(np.int64))
                cols.append(src.astype(np.int64))
                vals.append(sign * kappa[p, q])
    if not rows:
        return scipy.sparse.csr_matrix((dim, dim))
    return scipy.sparse.csr_matrix(
        (np.concatenate(vals),
         (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim))


def rotate_statevector(state, rotation):
    """Re-express a statevector in the rotated orbital basis.

    With new orbitals U columns over the old ones and kappa = log(U), the
    new amplitudes are exp(-K) psi for the one-body generator K lifted from
    kappa. U must be special orthogonal (a real log must exist).
    """
    u = np.asarray(rotation, dtype=float)
    kappa = scipy.linalg.logm(u)
    if np.max(np.abs(kappa.imag)) > SYMMETRY_TOL:
        raise ValueError(
            "rotation has no real logarithm; determinant is likely -1")
    kappa = kappa.real
    if np.max(np.abs(kappa + kappa.T)) > SYMMETRY_TOL:
        raise ValueError("log of the rotation is not antisymmetric")
    n = state.n_qubits
    gen = _one_body_generator(n, kappa)
    new_amp = expm_multiply(-gen, state.amplitudes)
    return Statevector(n, new_amp)
