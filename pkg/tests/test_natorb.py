"""Natural-orbital extraction and covariant basis transformations."""

import numpy as np
import pytest
import scipy.stats

from qmivqe.encoding import build_hamiltonian
from qmivqe.fcidump import parse_fcidump
from qmivqe.meanfield import hf_energy, mp2_amplitudes
from qmivqe.natorb import (natural_orbitals, one_body_rdm_spatial,
                           rotate_statevector, transform_integrals)
from qmivqe.states import (Statevector, fci_ground_state, hf_statevector,
                           mp2_statevector)
from qmivqe.vqe import particle_number

from conftest import fixture_file


def random_special_orthogonal(rng, m):
    u = scipy.stats.ortho_group.rvs(m, random_state=rng)
    if np.linalg.det(u) < 0:
        u[:, -1] = -u[:, -1]
    return u


def test_hf_density_is_aufbau_diagonal():
    state = hf_statevector(4, 4)
    density = one_body_rdm_spatial(state)
    np.testing.assert_allclose(density, np.diag([2.0, 2.0, 0.0, 0.0]),
                               atol=1e-12)


def test_density_is_hermitian_with_electron_trace(molecule):
    bundle = molecule("h2_631g")
    for tag in ("mp2", "fci"):
        density = one_body_rdm_spatial(bundle[f"psi_{tag}"])
        np.testing.assert_allclose(density, density.T, atol=1e-12)
        assert np.trace(density) == pytest.approx(2.0, abs=1e-10)


def test_density_rejects_odd_qubit_count():
    with pytest.raises(ValueError, match="even"):
        one_body_rdm_spatial(Statevector(3, np.eye(8)[0]))


def test_natural_orbital_conventions():
    rng = np.random.default_rng(17)
    for _ in range(30):
        m = int(rng.integers(2, 7))
        raw = rng.normal(size=(m, m))
        density = raw + raw.T
        occ, vecs = natural_orbitals(density)
        assert np.all(np.diff(occ) <= 1e-12)
        np.testing.assert_allclose(vecs.T @ vecs, np.eye(m), atol=1e-10)
        assert np.linalg.det(vecs) == pytest.approx(1.0, abs=1e-10)
        np.testing.assert_allclose(vecs @ np.diag(occ) @ vecs.T, density,
                                   atol=1e-10)
        for k in range(m - 1):
            lead = np.argmax(np.abs(vecs[:, k]))
            assert vecs[lead, k] > 0


def test_natural_orbitals_deterministic_under_degeneracy():
    density = np.diag([0.5, 0.5, 0.2])
    occ, vecs = natural_orbitals(density)
    np.testing.assert_allclose(occ, [0.5, 0.5, 0.2], atol=1e-14)
    np.testing.assert_allclose(vecs, np.eye(3), atol=1e-14)
    occ2, vecs2 = natural_orbitals(density.copy())
    np.testing.assert_array_equal(occ, occ2)
    np.testing.assert_array_equal(vecs, vecs2)


def test_natural_orbitals_reject_asymmetric_density():
    with pytest.raises(ValueError, match="symmetric"):
        natural_orbitals(np.array([[1.0, 0.5], [0.0, 1.0]]))


def test_fixture_occupations_descending(molecule):
    bundle = molecule("h2_631g")
    occ = bundle["occupations_mp2"]
    assert np.all(np.diff(occ) <= 0)
    assert occ.sum() == pytest.approx(2.0, abs=1e-10)
    assert occ.min() > -1e-10
    assert occ.max() < 2.0 + 1e-10


def test_transform_with_identity_is_noop():
    integrals = parse_fcidump(fixture_file("h2_631g"))
    same = transform_integrals(integrals, np.eye(4))
    np.testing.assert_allclose(same.h, integrals.h, atol=1e-12)
    assert same.core_energy == integrals.core_energy
    np.testing.assert_allclose(same.eri_dense(), integrals.eri_dense(),
                               atol=1e-12)
    assert same.source_label.endswith(" NO")
    assert hf_energy(same) == pytest.approx(hf_energy(integrals), abs=1e-12)


def test_transform_rejects_nonorthogonal_matrix():
    integrals = parse_fcidump(fixture_file("h2_631g"))
    with pytest.raises(ValueError, match="orthogonal"):
        transform_integrals(integrals, np.eye(4) * 1.01)
    with pytest.raises(ValueError, match="shape"):
        transform_integrals(integrals, np.eye(3))


def test_ground_energy_invariant_under_rotation():
    integrals = parse_fcidump(fixture_file("h2_631g"))
    ham = build_hamiltonian(integrals)
    e_ref, _ = fci_ground_state(ham, 2)
    rng = np.random.default_rng(43)
    for _ in range(3):
        u = random_special_orthogonal(rng, 4)
        rotated = transform_integrals(integrals, u)
        e_rot, _ = fci_ground_state(build_hamiltonian(rotated), 2)
        assert e_rot == pytest.approx(e_ref, abs=1e-8)


def test_statevector_rotation_is_energy_covariant():
    integrals = parse_fcidump(fixture_file("h2_631g"))
    ham = build_hamiltonian(integrals)
    psi = mp2_statevector(mp2_amplitudes(integrals))
    e_plain = ham.expectation(psi.amplitudes)
    rng = np.random.default_rng(47)
    u = random_special_orthogonal(rng, 4)
    rotated_ints = transform_integrals(integrals, u)
    rotated_ham = build_hamiltonian(rotated_ints)
    psi_rot = rotate_statevector(psi, u)
    assert psi_rot.norm() == pytest.approx(1.0, abs=1e-10)
    assert particle_number(psi_rot.amplitudes) == pytest.approx(2.0,
                                                                abs=1e-10)
    assert rotated_ham.expectation(psi_rot.amplitudes) == pytest.approx(
        e_plain, abs=1e-8)


def test_rotation_to_own_basis_diagonalizes_density(molecule):
    bundle = molecule("h2_631g")
    psi = bundle["psi_mp2"]
    rotation = bundle["rotation_mp2"]
    rotated = rotate_statevector(psi, rotation)
    density = one_body_rdm_spatial(rotated)
    offdiag = np.max(np.abs(density - np.diag(np.diag(density))))
    assert offdiag < 1e-8
    np.testing.assert_allclose(np.sort(np.diag(density))[::-1],
                               bundle["occupations_mp2"], atol=1e-8)


def test_reflection_rotation_is_rejected():
    state = hf_statevector(2, 2)
    reflect = np.diag([-1.0, 1.0])
    with pytest.raises(ValueError, match="logarithm"):
        rotate_statevector(state, reflect)
