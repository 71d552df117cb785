"""Shared fixtures for the test suite.

The expensive per-molecule quantities (reference energies, statevectors,
mutual-information matrices in both orbital bases) are computed once per
session and cached.  Hamiltonian operators are deliberately not kept in the
cache; they dominate memory for the larger fixtures and are cheap to rebuild
where a test needs one.
"""

import json
from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"
MOLECULES = ("h2_631g", "lih_sto3g_fc", "h2o_sto3g_fc", "nh3_sto3g_fc")

KCAL_PER_HARTREE = 627.509474


def fixture_file(name):
    return FIXTURES / f"{name}.fcidump"


@pytest.fixture(scope="session")
def reference():
    """Frozen per-molecule reference values (energies, sizes, labels)."""
    with open(FIXTURES / "reference.json") as fh:
        return json.load(fh)


_bundles = {}


def _build_bundle(name):
    from qmivqe.encoding import build_hamiltonian
    from qmivqe.fcidump import parse_fcidump
    from qmivqe.meanfield import hf_energy, mp2_amplitudes, mp2_energy
    from qmivqe.natorb import (natural_orbitals, one_body_rdm_spatial,
                               rotate_statevector)
    from qmivqe.states import (fci_ground_state, hf_statevector,
                               mp2_statevector, qmi_matrix)

    integrals = parse_fcidump(fixture_file(name))
    e_hf = hf_energy(integrals)
    amplitudes = mp2_amplitudes(integrals)
    e_mp2 = mp2_energy(amplitudes)

    hamiltonian = build_hamiltonian(integrals)
    e_fci, psi_fci = fci_ground_state(hamiltonian, integrals.n_electrons)
    psi_mp2 = mp2_statevector(amplitudes)

    hf_vec = hf_statevector(integrals.n_orbitals,
                            integrals.n_electrons).amplitudes
    overlap = np.vdot(hf_vec, psi_mp2.amplitudes)
    bracket = np.vdot(hf_vec, hamiltonian.apply(psi_mp2.amplitudes))
    hylleraas = float(((bracket - e_hf * overlap) / overlap).real)
    mp2_expectation = hamiltonian.expectation(psi_mp2.amplitudes)
    del hamiltonian

    bundle = {
        "integrals": integrals,
        "e_hf": e_hf,
        "e_mp2": e_mp2,
        "e_fci": e_fci,
        "hylleraas": hylleraas,
        "mp2_expectation": mp2_expectation,
        "psi_mp2": psi_mp2,
        "psi_fci": psi_fci,
    }
    for tag, psi in (("mp2", psi_mp2), ("fci", psi_fci)):
        occupations, rotation = natural_orbitals(one_body_rdm_spatial(psi))
        bundle[f"occupations_{tag}"] = occupations
        bundle[f"rotation_{tag}"] = rotation
        bundle[f"qmi_{tag}_hfco"] = qmi_matrix(psi)
        bundle[f"qmi_{tag}_no"] = qmi_matrix(rotate_statevector(psi, rotation))
    return bundle


@pytest.fixture(scope="session")
def molecule():
    """Accessor returning the cached derived-data bundle for one fixture."""

    def get(name):
        if name not in _bundles:
            _bundles[name] = _build_bundle(name)
        return _bundles[name]

    return get


_criteria_lines = []


class CriteriaLog:
    """Records one pass/fail line per end-to-end check, then asserts."""

    def check(self, criterion, passed, detail=""):
        status = "PASS" if passed else "FAIL"
        line = f"{status}  {criterion}"
        if detail:
            line += f"  [{detail}]"
        _criteria_lines.append(line)
        assert passed, f"{criterion}: {detail}"


@pytest.fixture(scope="session")
def criteria():
    return CriteriaLog()


def pytest_terminal_summary(terminalreporter):
    if not _criteria_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in _criteria_lines:
        terminalreporter.write_line(line)
