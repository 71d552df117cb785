"""Mean-field energy, Fock diagonality, and first-order doubles amplitudes."""

import numpy as np
import pytest

from qmivqe.fcidump import IntegralSet, parse_fcidump
from qmivqe.meanfield import (AmplitudeSet, fock_matrix, hf_energy,
                              mp2_amplitudes, mp2_energy)

from conftest import MOLECULES, fixture_file


def test_hf_energy_matches_reference(reference):
    for name in MOLECULES:
        integrals = parse_fcidump(fixture_file(name))
        assert hf_energy(integrals) == pytest.approx(
            reference[name]["scf_total_energy"], abs=1e-8)


def test_fock_is_diagonal_with_reference_energies(reference):
    for name in MOLECULES:
        integrals = parse_fcidump(fixture_file(name))
        f = fock_matrix(integrals)
        offdiag = np.max(np.abs(f - np.diag(np.diag(f))))
        assert offdiag < 1e-7
        np.testing.assert_allclose(
            np.diag(f), reference[name]["orbital_energies_active"],
            atol=1e-8)


def test_mp2_energy_matches_reference(reference):
    for name in MOLECULES:
        integrals = parse_fcidump(fixture_file(name))
        e_corr = mp2_energy(mp2_amplitudes(integrals))
        assert e_corr == pytest.approx(
            reference[name]["mp2_correlation"], abs=1e-8)


def test_amplitude_key_structure():
    integrals = parse_fcidump(fixture_file("lih_sto3g_fc"))
    amps = mp2_amplitudes(integrals)
    occ = set(amps.occupied_spin_orbitals())
    virt = set(range(amps.n_spin_orbitals)) - occ
    assert amps.t, "expected nonzero amplitudes"
    assert set(amps.antisym) == set(amps.t)
    for (i, j, a, b), t in amps.t.items():
        assert i < j and i in occ and j in occ
        assert a < b and a in virt and b in virt
        den = amps.eps[i] + amps.eps[j] - amps.eps[a] - amps.eps[b]
        assert t == pytest.approx(amps.antisym[(i, j, a, b)] / den,
                                  rel=1e-12)


def test_amplitudes_symmetric_under_global_spin_flip():
    integrals = parse_fcidump(fixture_file("h2_631g"))
    amps = mp2_amplitudes(integrals)
    m = amps.n_orbitals

    def flip(q):
        return (q + m) % (2 * m)

    for (i, j, a, b), t in amps.t.items():
        fi, fj = sorted((flip(i), flip(j)))
        fa, fb = sorted((flip(a), flip(b)))
        assert amps.t[(fi, fj, fa, fb)] == pytest.approx(t, rel=1e-12)


def test_occupied_spin_orbitals_blocked_layout():
    amps = AmplitudeSet(4, 4, np.zeros(8))
    assert amps.occupied_spin_orbitals() == [0, 1, 4, 5]
    assert amps.n_spin_orbitals == 8


def test_empty_amplitudes_give_zero_energy():
    amps = AmplitudeSet(2, 2, np.zeros(4))
    assert mp2_energy(amps) == 0.0


def test_rotated_orbitals_are_rejected():
    from qmivqe.natorb import transform_integrals

    integrals = parse_fcidump(fixture_file("h2_631g"))
    c, s = np.cos(0.3), np.sin(0.3)
    u = np.eye(4)
    u[0, 0] = u[1, 1] = c
    u[0, 1], u[1, 0] = -s, s
    mixed = transform_integrals(integrals, u)
    with pytest.raises(ValueError, match="semicanonicalize"):
        mp2_amplitudes(mixed)


def test_degenerate_denominator_raises():
    x = 0.25
    h = np.diag([0.0, x])
    eri = {(1, 0, 1, 0): x}
    integrals = IntegralSet(2, 2, 0, 0.0, h, eri)
    f = fock_matrix(integrals)
    np.testing.assert_allclose(f, np.zeros((2, 2)), atol=1e-15)
    with pytest.raises(ValueError, match="degenerate"):
        mp2_amplitudes(integrals)


def test_odd_electron_count_raises():
    integrals = IntegralSet(2, 1, 1, 0.0, np.zeros((2, 2)), {})
    with pytest.raises(ValueError, match="even"):
        hf_energy(integrals)
    with pytest.raises(ValueError, match="even"):
        mp2_amplitudes(integrals)


def test_variational_hylleraas_consistency(molecule):
    bundle = molecule("h2_631g")
    assert abs(bundle["hylleraas"] - bundle["e_mp2"]) < 1e-10
