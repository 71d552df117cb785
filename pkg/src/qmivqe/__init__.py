"""Mutual-information-driven entangler synthesis and statevector VQE.

The pipeline: parse molecular integrals (FCIDUMP), build the qubit
Hamiltonian under the Jordan-Wigner encoding, form an MP2 or FCI analysis
state (optionally in its natural-orbital basis), measure pairwise quantum
mutual information between qubits, keep the above-threshold pairs as CNOT
entanglers, and score the resulting shallow circuits with a batched
statevector VQE against ladder and random baselines.
"""

__version__ = "0.1.0"

from .ansatz import (CircuitSpec, EntanglerBlock, ParentSequence,
                     build_circuit, enumerate_permutations, ladder,
                     load_sequence, permute, random_entangler,
                     reduce_first_spot, save_sequence, threshold_pairs)
from .encoding import (PauliHamiltonian, build_hamiltonian,
                       determinant_state_index, jw_ladder_operator,
                       pauli_word_matrix, spin_orbital_index)
from .fcidump import (FcidumpParseError, IntegralSet, canonical_eri_key,
                      parse_fcidump, write_fcidump)
from .harness import (ExperimentConfig, PipelineState, ResourceGrid,
                      StageError, correlation_fraction, f_sigma,
                      pipeline_state, resource_surface, run_experiment,
                      summarize)
from .meanfield import (AmplitudeSet, fock_matrix, hf_energy,
                        mp2_amplitudes, mp2_energy)
from .natorb import (natural_orbitals, one_body_rdm_spatial,
                     rotate_statevector, transform_integrals)
from .states import (QmiMatrix, Statevector, fci_ground_state,
                     hf_statevector, mp2_statevector, one_qubit_rdm,
                     qmi_matrix, two_qubit_rdm, von_neumann_entropy)
from .vqe import (VqeRun, minimize_vqe, run_batch, runs_from_csv,
                  runs_to_csv, simulate, value_and_grad)
