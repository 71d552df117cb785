"""Closed-shell mean-field quantities and MP2 amplitudes.

Everything here assumes the integrals are expressed in restricted canonical
orbitals: the Fock matrix built from the one- and two-electron integrals must
already be (near) diagonal. Spin orbitals follow the blocked layout used by
the encoding module: alpha spin orbital of spatial orbital p is index p, the
beta one is index M + p.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AmplitudeSet",
    "fock_matrix",
    "hf_energy",
    "mp2_amplitudes",
    "mp2_energy",
]

FOCK_OFFDIAG_TOL = 1e-7


def _occupied_count(integrals):
    n = integrals.n_electrons
    if n % 2:
        raise ValueError(
            f"closed-shell occupation needs an even electron count, got {n}")
    return n // 2


def fock_matrix(integrals):
    """Closed-shell Fock matrix in the orbital basis of ``integrals``.

    F[p,q] = h[p,q] + sum_i (2 (pq|ii) - (pi|iq)) over occupied spatial i.
    """
    nocc = _occupied_count(integrals)
    g = integrals.eri_dense()
    f = integrals.h.copy()
    for i in range(nocc):
        f += 2.0 * g[:, :, i, i] - g[:, i, i, :]
    return f

def hf_energy(integrals):
    """Restricted Hartree-Fock energy of the aufbau determinant."""
    nocc = _occupied_count(integrals)
    g = integrals.eri_dense()
    e = integrals.core_energy
    for i in range(nocc):
        e += 2.0 * integrals.h[i, i]
        for j in range(nocc):
            e += 2.0 * g[i, i, j, j] - g[i, j, j, i]
    return e


@dataclass
class AmplitudeSet:
    """First-order doubles amplitudes over blocked spin orbitals.

    ``t`` maps (i, j, a, b) with i < j occupied and a < b virtual (spin
    orbital indices) to the amplitude; spin-forbidden combinations are
    omitted. ``antisym`` holds the matching antisymmetrized integral
    <ij||ab> so the correlation energy is recoverable from the map alone.
    """

    n_orbitals: int
    n_electrons: int
    eps: np.ndarray
    t: dict = field(default_factory=dict)
    antisym: dict = field(default_factory=dict)

    @property
    def n_spin_orbitals(self):
        return 2 * self.n_orbitals

    def occupied_spin_orbitals(self):
        m = self.n_orbitals
        nocc = self.n_electrons // 2
        return list(range(nocc)) + list(range(m, m + nocc))


def mp2_amplitudes(integrals):
    """Spin-orbital MP2 doubles amplitudes for canonical orbitals.

    Requires the Fock matrix to be diagonal within 1e-7; integral sets in a
    rotated basis must be semicanonicalized first. Denominators smaller than
    1e-12 raise with the offending index quadruple.
    """
    nocc = _occupied_count(integrals)
    m = integrals.n_orbitals
    f = fock_matrix(integrals)
    offdiag = np.max(np.abs(f - np.diag(np.diag(f)))) if m > 1 else 0.0
    if offdiag > FOCK_OFFDIAG_TOL:
        raise ValueError(
            f"Fock matrix has off-diagonal element {offdiag:.3e}; "
            "semicanonicalize the orbitals before requesting amplitudes")
    eps_spatial = np.diag(f)
    eps = np.concatenate([eps_spatial, eps_spatial])
    g = integrals.eri_dense()

    def antisym(i, j, a, b):
        # <ij||ab> over spin orbitals: (ia|jb) delta(si,sa) delta(sj,sb)
        # minus (ib|ja) delta(si,sb) delta(sj,sa), spatial parts chemists'.
        si, sj, sa, sb = i // m, j // m, a // m, b // m
        pi, pj, pa, pb = i % m, j % m, a % m, b % m
        direct = g[pi, pa, pj, pb] if (si == sa and sj == sb) else 0.0
        exchange = g[pi, pb, pj, pa] if (si == sb and sj == sa) else 0.0
        return direct - exchange

    occ = list(range(nocc)) + list(range(m, m + nocc))
    virt = [q for q in range(2 * m) if q not in set(occ)]
    amps = AmplitudeSet(m, integrals.n_electrons, eps)
    for ii, i in enumerate(occ):
        for j in occ[ii + 1:]:
            for aa, a in enumerate(virt):
                for b in virt[aa + 1:]:
                    num = antisym(i, j, a, b)
                    if num == 0.0:
                        continue
                    den = eps[i] + eps[j] - eps[a] - eps[b]
                    if abs(den) < 1e-12:
                        raise ValueError(
                            f"degenerate MP2 denominator for "
                            f"(i,j,a,b)=({i},{j},{a},{b})")
                    key = (i, j, a, b)
                    amps.t[key] = num / den
                    amps.antisym[key] = num
    return amps


def mp2_energy(amplitudes):
    """Second-order correlation energy from stored amplitude classes."""
    return sum(t * amplitudes.antisym[key]
               for key, t in amplitudes.t.items())
