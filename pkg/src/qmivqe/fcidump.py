"""Molecular integral container and FCIDUMP text round-trip.

Integrals are spatial-orbital quantities in Hartree: a symmetric one-electron
matrix ``h``, two-electron integrals ``(pq|rs)`` in chemists' notation stored
once per 8-fold permutational equivalence class, and a scalar core energy
(nuclear repulsion plus any folded-in frozen-core contribution).
"""

import re

import numpy as np

__all__ = [
    "FcidumpParseError",
    "IntegralSet",
    "canonical_eri_key",
    "parse_fcidump",
    "write_fcidump",
]


class FcidumpParseError(ValueError):
    """Raised for malformed FCIDUMP content, naming the offending line."""


def canonical_eri_key(p, q, r, s):
    """Canonical representative of the 8-fold class of (pq|rs)."""
    a = (p, q) if p >= q else (q, p)
    b = (r, s) if r >= s else (s, r)
    return a + b if a >= b else b + a


class IntegralSet:
    """Spatial-orbital integrals for one molecular system.

    Parameters
    ----------
    n_orbitals : int
        Number of spatial orbitals M.
    n_electrons : int
        Number of electrons N, with 0 < N <= 2M.
    ms2 : int
        Twice the spin projection.
    core_energy : float
        Scalar energy offset in Hartree.
    h : ndarray
        (M, M) symmetric one-electron integral matrix.
    eri : dict
        Two-electron integrals keyed by :func:`canonical_eri_key` tuples.
    source_label : str
        Provenance string for reports and transformed copies.
    """

    def __init__(self, n_orbitals, n_electrons, ms2, core_energy, h, eri,
                 source_label=""):
        if n_orbitals < 1:
            raise ValueError(f"need at least one orbital, got {n_orbitals}")
        if not 0 < n_electrons <= 2 * n_orbitals:
            raise ValueError(
                f"electron count {n_electrons} outside (0, {2 * n_orbitals}]")
        h = np.asarray(h, dtype=float)
        if h.shape != (n_orbitals, n_orbitals):
            raise ValueError(f"h has shape {h.shape}, expected "
                             f"({n_orbitals}, {n_orbitals})")
        if np.max(np.abs(h - h.T)) > 1e-12:
            raise ValueError("one-electron matrix is not symmetric")
        self.n_orbitals = n_orbitals
        self.n_electrons = n_electrons
        self.ms2 = ms2
        self.core_energy = float(core_energy)
        self.h = h
        self.eri = dict(eri)
        self.source_label = source_label

    def _check_index(self, *indices):
        for p in indices:
            if not 0 <= p < self.n_orbitals:
                raise IndexError(
                    f"orbital index {p} outside [0, {self.n_orbitals})")

    def eri_get(self, p, q, r, s):
        """Return (pq|rs) for 0-based indices in any permutational order."""
        self._check_index(p, q, r, s)
        return self.eri.get(canonical_eri_key(p, q, r, s), 0.0)

    def eri_dense(self):
        """Materialize the full (M, M, M, M) chemists'-notation array."""
        m = self.n_orbitals
        g = np.zeros((m, m, m, m))
        for (p, q, r, s), val in self.eri.items():
            for a, b in ((p, q), (q, p)):
                for c, d in ((r, s), (s, r)):
                    g[a, b, c, d] = val
                    g[c, d, a, b] = val
        return g

    @classmethod
    def from_dense(cls, h, g, core_energy, n_electrons, ms2=0,
                   source_label=""):
        """Build an IntegralSet from dense arrays, compressing the ERIs."""
        h = np.asarray(h, dtype=float)
        g = np.asarray(g, dtype=float)
        m = h.shape[0]
        eri = {}
        for p in range(m):
            for q in range(p + 1):
                for r in range(m):
                    for s in range(r + 1):
                        if (p, q) < (r, s):
                            continue
                        val = g[p, q, r, s]
                        if val != 0.0:
                            eri[(p, q, r, s)] = float(val)
        return cls(m, n_electrons, ms2, core_energy, h, eri, source_label)


_TERMINATORS = ("&END", "/END", "/")


def _parse_header(lines, path):
    header_tokens = []
    body_start = None
    for ln, line in enumerate(lines):
        text = line.strip()
        if not text:
            continue
        if not header_tokens and not text.upper().startswith("&FCI"):
            raise FcidumpParseError(
                f"{path}: line {ln + 1}: expected &FCI header, got {text!r}")
        done = False
        for term in _TERMINATORS:
            idx = text.upper().find(term)
            if idx >= 0:
                text = text[:idx]
                done = True
                break
        header_tokens.extend(re.split(r"[,\s]+", text))
        if done:
            body_start = ln + 1
            break
    if body_start is None:
        raise FcidumpParseError(f"{path}: header has no terminator")

    values = {}
    key = None
    for tok in header_tokens:
        if not tok or tok.upper() == "&FCI":
            continue
        if "=" in tok:
            key, _, val = tok.partition("=")
            key = key.upper()
            values[key] = []
            if val:
                values[key].append(val)
        elif key is not None:
            values[key].append(tok)
    for required in ("NORB", "NELEC"):
        if required not in values or not values[required]:
            raise FcidumpParseError(f"{path}: header is missing {required}")
    norb = int(values["NORB"][0])
    nelec = int(values["NELEC"][0])
    ms2 = int(values["MS2"][0]) if values.get("MS2") else 0
    return norb, nelec, ms2, body_start


def parse_fcidump(path, source_label=None):
    """Parse an FCIDUMP file into an :class:`IntegralSet`.

    The header is read up to a ``/`` or ``&END`` terminator. Body lines hold
    ``value i j k l`` with 1-based indices: four positive indices set an ERI
    class, ``i j 0 0`` sets a one-electron element, the all-zero line sets
    the core energy. Later duplicates overwrite earlier ones.
    """
    with open(path) as fh:
        lines = fh.read().splitlines()
    norb, nelec, ms2, body_start = _parse_header(lines, path)

    h = np.zeros((norb, norb))
    eri = {}
    core = 0.0
    for ln in range(body_start, len(lines)):
        text = lines[ln].strip()
        if not text:
            continue
        tokens = text.split()
        if len(tokens) != 5:
            raise FcidumpParseError(
                f"{path}: line {ln + 1}: expected 'value i j k l', "
                f"got {text!r}")
        try:
            val = float(tokens[0].replace("D", "E").replace("d", "e"))
            i, j, k, l = (int(t) for t in tokens[1:])
        except ValueError as exc:
            raise FcidumpParseError(
                f"{path}: line {ln + 1}: {exc}") from None
        for idx in (i, j, k, l):
            if idx < 0 or idx > norb:
                raise FcidumpParseError(
                    f"{path}: line {ln + 1}: index {idx} outside "
                    f"[0, {norb}]")
        if i == j == k == l == 0:
            core = val
        elif i > 0 and j > 0 and k == 0 and l == 0:
            h[i - 1, j - 1] = val
            h[j - 1, i - 1] = val
        elif i > 0 and j > 0 and k > 0 and l > 0:
            eri[canonical_eri_key(i - 1, j - 1, k - 1, l - 1)] = val
        else:
            raise FcidumpParseError(
                f"{path}: line {ln + 1}: unsupported index pattern "
                f"({i} {j} {k} {l})")

    if source_label is None:
        source_label = re.sub(r"\.[^.]*$", "", str(path).replace("\\", "/")
                              .rsplit("/", 1)[-1])
    return IntegralSet(norb, nelec, ms2, core, h, eri, source_label)


def write_fcidump(integrals, path):
    """Write an :class:`IntegralSet` as FCIDUMP text.

    One line per stored ERI class and per nonzero one-electron element, then
    the core-energy line. Values keep 17 significant digits so a write/parse
    round trip reproduces them exactly.
    """
    m = integrals.n_orbitals
    lines = [
        f" &FCI NORB={m},NELEC={integrals.n_electrons},"
        f"MS2={integrals.ms2},",
        "  ORBSYM=" + "1," * m,
        "  ISYM=1,",
        " &END",
    ]

    def fmt(v, p, q, r, s):
        return f"{v: .16E} {p:3d} {q:3d} {r:3d} {s:3d}"

    for key in sorted(integrals.eri):
        p, q, r, s = key
        lines.append(fmt(integrals.eri[key], p + 1, q + 1, r + 1, s + 1))
    for p in range(m):
        for q in range(p + 1):
            if integrals.h[p, q] != 0.0:
                lines.append(fmt(integrals.h[p, q], p + 1, q + 1, 0, 0))
    lines.append(fmt(integrals.core_energy, 0, 0, 0, 0))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
