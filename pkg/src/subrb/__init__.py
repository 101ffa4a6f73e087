"""Benchmarking workbench for Clifford-subgroup gate sets.

Simulates randomized-benchmarking experiments whose gates are drawn from a
subgroup of the Clifford group (Pauli, CNOT+Pauli, real Clifford, or the full
Clifford group), decomposes the Pauli operators into conjugation blocks,
predicts the multi-exponential decay eigenvalues analytically, and recovers
them — and entanglement-infidelity bounds — from simulated decay data.
"""

from .analysis import (
    DecayFit,
    InfidelityReport,
    estimate_infidelity,
    fit_single_exponential,
    fit_two_exponentials,
)
from .channels import (
    BlockChannel,
    BoundsResult,
    DenseChi,
    PauliChannel,
    asymptotic_lambdas,
    average_infidelity,
    block_eigenvalue,
    closed_form_lambdas,
    dense_group_twirl,
    dense_pauli_twirl,
    depolarizing_lambda,
    eigenvalue_table,
    infidelity_bounds,
    pauli_eigenvalue,
    twirl_to_blocks,
    worst_case_factor,
)
from .engine import (
    DecayData,
    ExperimentConfig,
    SamplingSpec,
    exact_sequence_fidelity,
    monte_carlo_sequence_fidelity,
    run_experiment,
    sample_sequence,
    sequence_rng,
    stabilizer_overlap,
)
from .errors import (
    CapExceededError,
    ConfigError,
    DegenerateFitError,
    NonUniformCensusError,
    SubrbError,
    VerificationError,
)
from .orbits import (
    AnticommutationCensus,
    BlockDecomposition,
    MomentReport,
    anticommutation_census,
    closed_form_sizes,
    compute_blocks,
    two_design_moments,
)
from .pauli import PauliOperator, classify_cnot_pauli_block, enumerate_paulis
from .tableau import (
    CNOT_PAULI,
    FULL_CLIFFORD,
    PAULI,
    REAL_CLIFFORD,
    CliffordTableau,
    GeneratorSet,
    apply_to_pauli,
    cnot,
    compose,
    enumerate_group,
    group_by_name,
    hadamard,
    invert,
    phase_gate,
    unsigned_action_index,
    x_gate,
    y_gate,
    z_gate,
)

__version__ = "0.1.0"

__all__ = [
    "AnticommutationCensus",
    "BlockChannel",
    "BlockDecomposition",
    "BoundsResult",
    "CNOT_PAULI",
    "CapExceededError",
    "CliffordTableau",
    "ConfigError",
    "DecayData",
    "DecayFit",
    "DegenerateFitError",
    "DenseChi",
    "ExperimentConfig",
    "FULL_CLIFFORD",
    "GeneratorSet",
    "InfidelityReport",
    "MomentReport",
    "NonUniformCensusError",
    "PAULI",
    "PauliChannel",
    "PauliOperator",
    "REAL_CLIFFORD",
    "SamplingSpec",
    "SubrbError",
    "VerificationError",
    "anticommutation_census",
    "apply_to_pauli",
    "asymptotic_lambdas",
    "average_infidelity",
    "block_eigenvalue",
    "classify_cnot_pauli_block",
    "closed_form_lambdas",
    "closed_form_sizes",
    "cnot",
    "compose",
    "compute_blocks",
    "dense_group_twirl",
    "dense_pauli_twirl",
    "depolarizing_lambda",
    "eigenvalue_table",
    "enumerate_group",
    "enumerate_paulis",
    "estimate_infidelity",
    "exact_sequence_fidelity",
    "fit_single_exponential",
    "fit_two_exponentials",
    "group_by_name",
    "hadamard",
    "infidelity_bounds",
    "invert",
    "monte_carlo_sequence_fidelity",
    "pauli_eigenvalue",
    "phase_gate",
    "run_experiment",
    "sample_sequence",
    "sequence_rng",
    "stabilizer_overlap",
    "twirl_to_blocks",
    "two_design_moments",
    "unsigned_action_index",
    "worst_case_factor",
    "x_gate",
    "y_gate",
    "z_gate",
]
