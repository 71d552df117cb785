#!/usr/bin/env python3
"""One-shot generator for the integral fixtures under tests/fixtures/.

Runs restricted Hartree-Fock in embedded Gaussian bases (McMurchie-Davidson
integrals, s and p shells), folds any frozen core into the scalar energy, and
writes the active-space integrals as FCIDUMP files. Reference energies (RHF,
MP2 correlation, determinant-CI ground state) are frozen into reference.json
so the test suite can check the engine against independently computed values.

Needs numpy and scipy only. Run from the repository root:

    python tools/make_fixtures.py
"""

import itertools
import json
import math
import os

import numpy as np
from scipy.special import hyp1f1

ANGSTROM_TO_BOHR = 1.0 / 0.52917721092
HARTREE_TO_KCAL = 627.509474

# Standard published contractions. Each shell: (type, exponents, [coef rows]);
# an SP shell carries one s row and one p row over shared exponents.
STO3G = {
    "H": [
        ("S", [3.425250914, 0.6239137298, 0.1688554040],
         [[0.1543289673, 0.5353281423, 0.4446345422]]),
    ],
    "Li": [
        ("S", [16.11957475, 2.936200663, 0.7946504870],
         [[0.1543289673, 0.5353281423, 0.4446345422]]),
        ("SP", [0.6362897469, 0.1478600533, 0.0480886784],
         [[-0.09996722919, 0.3995128261, 0.7001154689],
          [0.1559162750, 0.6076837186, 0.3919573931]]),
    ],
    "N": [
        ("S", [99.10616896, 18.05231239, 4.885660238],
         [[0.1543289673, 0.5353281423, 0.4446345422]]),
        ("SP", [3.780455879, 0.8784966449, 0.2857143744],
         [[-0.09996722919, 0.3995128261, 0.7001154689],
          [0.1559162750, 0.6076837186, 0.3919573931]]),
    ],
    "O": [
        ("S", [130.7093214, 23.80886605, 6.443608313],
         [[0.1543289673, 0.5353281423, 0.4446345422]]),
        ("SP", [5.033151319, 1.169596125, 0.3803889600],
         [[-0.09996722919, 0.3995128261, 0.7001154689],
          [0.1559162750, 0.6076837186, 0.3919573931]]),
    ],
}

H_631G = [
    ("S", [18.73113696, 2.825394365, 0.6401216923],
     [[0.03349460434, 0.2347269535, 0.8137573261]]),
    ("S", [0.1612777588], [[1.0]]),
]

CHARGES = {"H": 1, "Li": 3, "N": 7, "O": 8}

MOLECULES = {
    "h2_631g": {
        "atoms": [("H", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, 0.74))],
        "basis": {"H": H_631G},
        "ncore": 0,
        "label": "H2 6-31G R=0.74A",
    },
    "lih_sto3g_fc": {
        "atoms": [("Li", (0.0, 0.0, 0.0)), ("H", (0.0, 0.0, 1.595))],
        "basis": {"Li": STO3G["Li"], "H": STO3G["H"]},
        "ncore": 1,
        "label": "LiH STO-3G R=1.595A frozen-core",
    },
    "h2o_sto3g_fc": {
        "atoms": [
            ("O", (0.0, 0.0, 0.0)),
            ("H", (0.757, 0.586, 0.0)),
            ("H", (-0.757, 0.586, 0.0)),
        ],
        "basis": {"O": STO3G["O"], "H": STO3G["H"]},
        "ncore": 1,
        "label": "H2O STO-3G frozen-core",
    },
    "nh3_sto3g_fc": {
        "atoms": [
            ("N", (0.0, 0.0, 0.1211)),
            ("H", (0.0, 0.9306, -0.2826)),
            ("H", (0.8059, -0.4653, -0.2826)),
            ("H", (-0.8059, -0.4653, -0.2826)),
        ],
        "basis": {"N": STO3G["N"], "H": STO3G["H"]},
        "ncore": 1,
        "label": "NH3 STO-3G frozen-core",
    },
}

# Anchors for the active-space correlation energy, kcal/mol: generation fails
# loudly if the computed determinant-CI result drifts outside the window.
ANCHORS_KCAL = {
    "h2_631g": (15.636, 0.05),
    "lih_sto3g_fc": (12.6446, 0.05),
    "h2o_sto3g_fc": (31.006, 0.1),
    "nh3_sto3g_fc": (41.287, 0.1),
}


def double_factorial(n):
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


class Cgf:
    """Contracted Cartesian Gaussian: center, powers, primitives."""

    def __init__(self, center, lmn, exps, coefs):
        self.center = np.asarray(center, dtype=float)
        self.lmn = lmn
        self.exps = list(exps)
        norms = [prim_norm(a, lmn) for a in self.exps]
        raw = [c * n for c, n in zip(coefs, norms)]
        s = 0.0
        for ca, a in zip(raw, self.exps):
            for cb, b in zip(raw, self.exps):
                s += ca * cb * overlap_prim(a, lmn, self.center, b, lmn, self.center)
        self.coefs = [c / math.sqrt(s) for c in raw]


def prim_norm(alpha, lmn):
    l, m, n = lmn
    num = (2.0 * alpha / math.pi) ** 1.5 * (4.0 * alpha) ** (l + m + n)
    den = (double_factorial(2 * l - 1) * double_factorial(2 * m - 1)
           * double_factorial(2 * n - 1))
    return math.sqrt(num / den)


def hermite_e(i, j, t, qx, a, b):
    p = a + b
    mu = a * b / p
    if t < 0 or t > i + j:
        return 0.0
    if i == j == t == 0:
        return math.exp(-mu * qx * qx)
    if j == 0:
        return ((1.0 / (2.0 * p)) * hermite_e(i - 1, j, t - 1, qx, a, b)
                - (mu * qx / a) * hermite_e(i - 1, j, t, qx, a, b)
                + (t + 1) * hermite_e(i - 1, j, t + 1, qx, a, b))
    return ((1.0 / (2.0 * p)) * hermite_e(i, j - 1, t - 1, qx, a, b)
            + (mu * qx / b) * hermite_e(i, j - 1, t, qx, a, b)
            + (t + 1) * hermite_e(i, j - 1, t + 1, qx, a, b))


def overlap_prim(a, lmn1, ra, b, lmn2, rb):
    l1, m1, n1 = lmn1
    l2, m2, n2 = lmn2
    s1 = hermite_e(l1, l2, 0, ra[0] - rb[0], a, b)
    s2 = hermite_e(m1, m2, 0, ra[1] - rb[1], a, b)
    s3 = hermite_e(n1, n2, 0, ra[2] - rb[2], a, b)
    return s1 * s2 * s3 * (math.pi / (a + b)) ** 1.5


def kinetic_prim(a, lmn1, ra, b, lmn2, rb):
    l2, m2, n2 = lmn2

    def s(dl, dm, dn):
        lmn = (l2 + dl, m2 + dm, n2 + dn)
        if min(lmn) < 0:
            return 0.0
        return overlap_prim(a, lmn1, ra, b, lmn, rb)

    term0 = b * (2 * (l2 + m2 + n2) + 3) * s(0, 0, 0)
    term1 = -2.0 * b * b * (s(2, 0, 0) + s(0, 2, 0) + s(0, 0, 2))
    term2 = -0.5 * (l2 * (l2 - 1) * s(-2, 0, 0) + m2 * (m2 - 1) * s(0, -2, 0)
                    + n2 * (n2 - 1) * s(0, 0, -2))
    return term0 + term1 + term2


def boys(n, t):
    return hyp1f1(n + 0.5, n + 1.5, -t) / (2.0 * n + 1.0)


def hermite_r(t, u, v, n, p, pc):
    if t < 0 or u < 0 or v < 0:
        return 0.0
    if t == u == v == 0:
        r2 = pc[0] * pc[0] + pc[1] * pc[1] + pc[2] * pc[2]
        return (-2.0 * p) ** n * boys(n, p * r2)
    if t > 0:
        return ((t - 1) * hermite_r(t - 2, u, v, n + 1, p, pc)
                + pc[0] * hermite_r(t - 1, u, v, n + 1, p, pc))
    if u > 0:
        return ((u - 1) * hermite_r(t, u - 2, v, n + 1, p, pc)
                + pc[1] * hermite_r(t, u - 1, v, n + 1, p, pc))
    return ((v - 1) * hermite_r(t, u, v - 2, n + 1, p, pc)
            + pc[2] * hermite_r(t, u, v - 1, n + 1, p, pc))


def nuclear_prim(a, lmn1, ra, b, lmn2, rb, rc):
    l1, m1, n1 = lmn1
    l2, m2, n2 = lmn2
    p = a + b
    rp = (a * ra + b * rb) / p
    pc = rp - np.asarray(rc)
    val = 0.0
    for t in range(l1 + l2 + 1):
        et = hermite_e(l1, l2, t, ra[0] - rb[0], a, b)
        if et == 0.0:
            continue
        for u in range(m1 + m2 + 1):
            eu = hermite_e(m1, m2, u, ra[1] - rb[1], a, b)
            if eu == 0.0:
                continue
            for v in range(n1 + n2 + 1):
                ev = hermite_e(n1, n2, v, ra[2] - rb[2], a, b)
                if ev == 0.0:
                    continue
                val += et * eu * ev * hermite_r(t, u, v, 0, p, pc)
    return 2.0 * math.pi / p * val


def eri_prim(a, lmn1, ra, b, lmn2, rb, c, lmn3, rc, d, lmn4, rd):
    l1, m1, n1 = lmn1
    l2, m2, n2 = lmn2
    l3, m3, n3 = lmn3
    l4, m4, n4 = lmn4
    p = a + b
    q = c + d
    alpha = p * q / (p + q)
    rp = (a * ra + b * rb) / p
    rq = (c * rc + d * rd) / q
    pq = rp - rq

    e12 = {}
    for t in range(l1 + l2 + 1):
        for u in range(m1 + m2 + 1):
            for v in range(n1 + n2 + 1):
                val = (hermite_e(l1, l2, t, ra[0] - rb[0], a, b)
                       * hermite_e(m1, m2, u, ra[1] - rb[1], a, b)
                       * hermite_e(n1, n2, v, ra[2] - rb[2], a, b))
                if val != 0.0:
                    e12[(t, u, v)] = val
    e34 = {}
    for t in range(l3 + l4 + 1):
        for u in range(m3 + m4 + 1):
            for v in range(n3 + n4 + 1):
                val = (hermite_e(l3, l4, t, rc[0] - rd[0], c, d)
                       * hermite_e(m3, m4, u, rc[1] - rd[1], c, d)
                       * hermite_e(n3, n4, v, rc[2] - rd[2], c, d))
                if val != 0.0:
                    e34[(t, u, v)] = val

    val = 0.0
    for (t, u, v), ea in e12.items():
        for (tt, uu, vv), eb in e34.items():
            sign = -1.0 if (tt + uu + vv) % 2 else 1.0
            val += ea * eb * sign * hermite_r(t + tt, u + uu, v + vv, 0, alpha, pq)
    return val * 2.0 * math.pi ** 2.5 / (p * q * math.sqrt(p + q))


def build_basis(atoms, basis):
    funcs = []
    for sym, xyz in atoms:
        center = np.asarray(xyz, dtype=float) * ANGSTROM_TO_BOHR
        for shell in basis[sym]:
            kind, exps, rows = shell
            funcs.append(Cgf(center, (0, 0, 0), exps, rows[0]))
            if kind == "SP":
                for lmn in ((1, 0, 0), (0, 1, 0), (0, 0, 1)):
                    funcs.append(Cgf(center, lmn, exps, rows[1]))
    return funcs


def contracted(kernel, fa, fb, *extra):
    val = 0.0
    for ca, a in zip(fa.coefs, fa.exps):
        for cb, b in zip(fb.coefs, fb.exps):
            val += ca * cb * kernel(a, fa.lmn, fa.center, b, fb.lmn, fb.center, *extra)
    return val


def contracted_eri(fa, fb, fc, fd):
    val = 0.0
    for ca, a in zip(fa.coefs, fa.exps):
        for cb, b in zip(fb.coefs, fb.exps):
            for cc, c in zip(fc.coefs, fc.exps):
                for cd, d in zip(fd.coefs, fd.exps):
                    val += ca * cb * cc * cd * eri_prim(
                        a, fa.lmn, fa.center, b, fb.lmn, fb.center,
                        c, fc.lmn, fc.center, d, fd.lmn, fd.center)
    return val


def ao_integrals(atoms, basis):
    funcs = build_basis(atoms, basis)
    m = len(funcs)
    s = np.zeros((m, m))
    t = np.zeros((m, m))
    v = np.zeros((m, m))
    centers = [(CHARGES[sym], np.asarray(xyz) * ANGSTROM_TO_BOHR)
               for sym, xyz in atoms]
    for i in range(m):
        for j in range(i + 1):
            s[i, j] = s[j, i] = contracted(
                lambda *a: overlap_prim(*a), funcs[i], funcs[j])
            t[i, j] = t[j, i] = contracted(
                lambda *a: kinetic_prim(*a), funcs[i], funcs[j])
            acc = 0.0
            for charge, rc in centers:
                acc -= charge * contracted(nuclear_prim, funcs[i], funcs[j], rc)
            v[i, j] = v[j, i] = acc

    g = np.zeros((m, m, m, m))
    pairs = [(i, j) for i in range(m) for j in range(i + 1)]
    for a, (i, j) in enumerate(pairs):
        for k, l in pairs[:a + 1]:
            val = contracted_eri(funcs[i], funcs[j], funcs[k], funcs[l])
            for (p, q) in ((i, j), (j, i)):
                for (r, ss) in ((k, l), (l, k)):
                    g[p, q, r, ss] = val
                    g[r, ss, p, q] = val

    enuc = 0.0
    for (za, ra), (zb, rb) in itertools.combinations(centers, 2):
        enuc += za * zb / np.linalg.norm(ra - rb)
    return s, t + v, g, enuc


def rhf(s, hcore, g, nocc, enuc):
    evals, evecs = np.linalg.eigh(s)
    x = evecs @ np.diag(evals ** -0.5) @ evecs.T
    f = hcore.copy()
    energy = 0.0
    focks, errs = [], []
    dm = None
    for _ in range(300):
        fp = x.T @ f @ x
        eps, cp = np.linalg.eigh(fp)
        c = x @ cp
        dm_new = 2.0 * c[:, :nocc] @ c[:, :nocc].T
        j = np.einsum("pqrs,rs->pq", g, dm_new)
        k = np.einsum("prqs,rs->pq", g, dm_new)
        f = hcore + j - 0.5 * k
        e_new = 0.5 * np.sum(dm_new * (hcore + f)) + enuc
        err = f @ dm_new @ s - s @ dm_new @ f
        errs.append(x.T @ err @ x)
        focks.append(f.copy())
        if len(focks) > 8:
            focks.pop(0)
            errs.pop(0)
        if dm is not None and abs(e_new - energy) < 1e-13 \
                and np.max(np.abs(dm_new - dm)) < 1e-11:
            return e_new, eps, c
        dm, energy = dm_new, e_new
        n = len(focks)
        if n > 1:
            b = -np.ones((n + 1, n + 1))
            b[n, n] = 0.0
            for a in range(n):
                for bb in range(n):
                    b[a, bb] = np.sum(errs[a] * errs[bb])
            rhs = np.zeros(n + 1)
            rhs[n] = -1.0
            try:
                w = np.linalg.solve(b, rhs)[:n]
                f = sum(wi * fi for wi, fi in zip(w, focks))
            except np.linalg.LinAlgError:
                pass
    raise RuntimeError("SCF did not converge")


def active_space(hcore, g, c, nocc, ncore):
    c_core = c[:, :ncore]
    c_act = c[:, ncore:]
    d_core = 2.0 * c_core @ c_core.T
    j = np.einsum("pqrs,rs->pq", g, d_core)
    k = np.einsum("prqs,rs->pq", g, d_core)
    e_core = np.sum(d_core * hcore) + 0.5 * np.sum(d_core * (j - 0.5 * k))
    h_act = c_act.T @ (hcore + j - 0.5 * k) @ c_act
    g_act = np.einsum("pqrs,pi,qj,rk,sl->ijkl", g, c_act, c_act, c_act, c_act,
                      optimize=True)
    return h_act, g_act, e_core


def mp2_correlation(h, g, eps, nocc):
    norb = h.shape[0]
    occ = range(nocc)
    virt = range(nocc, norb)
    e = 0.0
    for i in occ:
        for j in occ:
            for a in virt:
                for b in virt:
                    iajb = g[i, a, j, b]
                    ibja = g[i, b, j, a]
                    e += iajb * (2.0 * iajb - ibja) / (
                        eps[i] + eps[j] - eps[a] - eps[b])
    return e


def single_phase(mask, i, a):
    lo, hi = (i, a) if i < a else (a, i)
    between = ((1 << hi) - 1) & ~((1 << (lo + 1)) - 1)
    return -1.0 if bin(mask & between).count("1") % 2 else 1.0


def excitation(imask, jmask):
    """Orbitals removed/added going from imask to jmask, with phase."""
    diff = imask ^ jmask
    removed = sorted(_bits(imask & diff))
    added = sorted(_bits(jmask & diff))
    phase = 1.0
    mask = imask
    for i, a in zip(removed, added):
        phase *= single_phase(mask, i, a)
        mask = (mask & ~(1 << i)) | (1 << a)
    return removed, added, phase


def _bits(mask):
    out = []
    while mask:
        b = mask & -mask
        out.append(b.bit_length() - 1)
        mask ^= b
    return out


def fci_ground(h, g, e_core, norb, nelec):
    nocc = nelec // 2
    strings = []
    for occ in itertools.combinations(range(norb), nocc):
        mask = 0
        for o in occ:
            mask |= 1 << o
        strings.append(mask)
    ns = len(strings)
    dets = [(ia, ib) for ia in range(ns) for ib in range(ns)]
    dim = len(dets)
    ham = np.zeros((dim, dim))

    def occ_list(mask):
        return _bits(mask)

    for col, (ja, jb) in enumerate(dets):
        for row in range(col + 1):
            ia, ib = dets[row]
            da = bin(strings[ia] ^ strings[ja]).count("1") // 2
            db = bin(strings[ib] ^ strings[jb]).count("1") // 2
            if da + db > 2:
                continue
            val = 0.0
            if da == 0 and db == 0:
                occa = occ_list(strings[ia])
                occb = occ_list(strings[ib])
                val = sum(h[p, p] for p in occa) + sum(h[p, p] for p in occb)
                for p in occa:
                    for q in occa:
                        val += 0.5 * (g[p, p, q, q] - g[p, q, q, p])
                for p in occb:
                    for q in occb:
                        val += 0.5 * (g[p, p, q, q] - g[p, q, q, p])
                for p in occa:
                    for q in occb:
                        val += g[p, p, q, q]
            elif da == 1 and db == 0:
                (i,), (a,), ph = excitation(strings[ia], strings[ja])
                acc = h[i, a]
                for p in occ_list(strings[ia] & strings[ja]):
                    acc += g[i, a, p, p] - g[i, p, p, a]
                for p in occ_list(strings[ib]):
                    acc += g[i, a, p, p]
                val = ph * acc
            elif da == 0 and db == 1:
                (i,), (a,), ph = excitation(strings[ib], strings[jb])
                acc = h[i, a]
                for p in occ_list(strings[ib] & strings[jb]):
                    acc += g[i, a, p, p] - g[i, p, p, a]
                for p in occ_list(strings[ia]):
                    acc += g[i, a, p, p]
                val = ph * acc
            elif da == 2 and db == 0:
                (i, j), (a, b), ph = excitation(strings[ia], strings[ja])
                val = ph * (g[i, a, j, b] - g[i, b, j, a])
            elif da == 0 and db == 2:
                (i, j), (a, b), ph = excitation(strings[ib], strings[jb])
                val = ph * (g[i, a, j, b] - g[i, b, j, a])
            elif da == 1 and db == 1:
                (i,), (a,), pha = excitation(strings[ia], strings[ja])
                (j,), (b,), phb = excitation(strings[ib], strings[jb])
                val = pha * phb * g[i, a, j, b]
            ham[row, col] = val
            ham[col, row] = val

    evals = np.linalg.eigvalsh(ham)
    return evals[0] + e_core


def write_fcidump(path, norb, nelec, ms2, h, g, e_core):
    lines = [
        f" &FCI NORB={norb},NELEC={nelec},MS2={ms2},",
        "  ORBSYM=" + "1," * norb,
        "  ISYM=1,",
        " &END",
    ]

    def fmt(v, p, q, r, s):
        return f"{v: .16E} {p:3d} {q:3d} {r:3d} {s:3d}"

    pairs = [(p, q) for p in range(norb) for q in range(p + 1)]
    for a, (p, q) in enumerate(pairs):
        for r, s in pairs[:a + 1]:
            val = g[p, q, r, s]
            if abs(val) > 1e-16:
                lines.append(fmt(val, p + 1, q + 1, r + 1, s + 1))
    for p in range(norb):
        for q in range(p + 1):
            if abs(h[p, q]) > 1e-16:
                lines.append(fmt(h[p, q], p + 1, q + 1, 0, 0))
    lines.append(fmt(e_core, 0, 0, 0, 0))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def main():
    outdir = os.path.join(os.path.dirname(__file__), "..", "tests", "fixtures")
    outdir = os.path.abspath(outdir)
    os.makedirs(outdir, exist_ok=True)
    reference = {}

    for name, mol in MOLECULES.items():
        atoms = mol["atoms"]
        nelec_total = sum(CHARGES[sym] for sym, _ in atoms)
        nocc = nelec_total // 2
        ncore = mol["ncore"]

        s, hcore, g, enuc = ao_integrals(atoms, mol["basis"])
        e_scf, eps, c = rhf(s, hcore, g, nocc, enuc)
        h_act, g_act, e_core_elec = active_space(hcore, g, c, nocc, ncore)
        e_core = e_core_elec + enuc
        norb_act = h_act.shape[0]
        nocc_act = nocc - ncore
        nelec_act = nelec_total - 2 * ncore

        # The folded integrals must rebuild the total RHF energy exactly.
        e_hf_check = e_core + 2.0 * sum(h_act[i, i] for i in range(nocc_act))
        for i in range(nocc_act):
            for j in range(nocc_act):
                e_hf_check += 2.0 * g_act[i, i, j, j] - g_act[i, j, j, i]
        assert abs(e_hf_check - e_scf) < 1e-10, (name, e_hf_check, e_scf)

        e_mp2 = mp2_correlation(h_act, g_act, eps[ncore:], nocc_act)
        e_fci = fci_ground(h_act, g_act, e_core, norb_act, nelec_act)
        corr_kcal = (e_fci - e_scf) * HARTREE_TO_KCAL
        anchor, window = ANCHORS_KCAL[name]
        delta = abs(-corr_kcal - anchor)
        status = "ok" if delta <= window else "OUT OF WINDOW"
        print(f"{name}: RHF {e_scf:.10f}  MP2corr {e_mp2:.10f}  "
              f"FCI {e_fci:.10f}  corr {-corr_kcal:.4f} kcal/mol "
              f"(anchor {anchor}, delta {delta:.4f}) {status}")
        if delta > window:
            raise SystemExit(f"{name}: correlation energy missed the anchor")

        path = os.path.join(outdir, f"{name}.fcidump")
        write_fcidump(path, norb_act, nelec_act, 0, h_act, g_act, e_core)
        reference[name] = {
            "label": mol["label"],
            "norb": norb_act,
            "nelec": nelec_act,
            "ms2": 0,
            "ncore_folded": ncore,
            "scf_total_energy": e_scf,
            "core_energy": e_core,
            "mp2_correlation": e_mp2,
            "fci_total_energy": e_fci,
            "fci_correlation_kcal": corr_kcal,
            "orbital_energies_active": list(eps[ncore:]),
        }

    with open(os.path.join(outdir, "reference.json"), "w") as fh:
        json.dump(reference, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print("fixtures written to", outdir)


if __name__ == "__main__":
    main()
