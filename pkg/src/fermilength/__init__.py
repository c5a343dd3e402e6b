"""Scalable single-particle Fermi-Hubbard VQE benchmark."""

from .ansatz import (
    Circuit,
    Gate,
    a_gate_matrix,
    build_full_ladder_circuit,
    build_ladder_circuit,
    decompose_a_full,
    gate_counts,
    solve_parameters,
    state_coefficients,
    to_qasm,
)
from .bench import BenchmarkConfig, BenchmarkReport, determine_lstar, error_score, run_sweep
from .estimator import EnergyEstimate, energy_from_group_counts, energy_statevector, pauli_expectation_from_counts
from .mitigation import CalibrationSet, QuasiDistribution, apply_mitigation, calibrate, mitigated_energy
from .pauli_model import (
    CommutingGroup,
    PauliTerm,
    QubitHamiltonian,
    build_hamiltonian,
    dense_matrix,
    exact_gs_energy,
    group_commuting,
    single_particle_oracle,
)
from .simulator import CountsTable, NoiseModel, apply_gate_noise, measure_circuit, rotate_to_basis, run_statevector, sample_counts
from .vqe import OptimizerTrace, optimize_shotbased, preoptimize

__version__ = "0.1.0"
