"""
Dual Update - quantum (Lüders/Born) and classical (Bayes) probability update side by side.

This package computes Born probabilities and Lüders updates on finite-dimensional
Hilbert spaces, the matching Bayes conditioning on finite probability spaces,
and checks where the two agree: compatible observables, two-site conditioning,
sampled records and the existence of joint distributions.
"""

# Linear algebra
from .hilbert import (
    SpectralDecomposition,
    spectral_decompose,
    tensor_product,
    partial_trace,
    lift_to_site,
    commutator,
    trace_distance,
)

# Quantum states and updates
from .quantum_state import (
    Observable,
    QuantumState,
    OutcomeDistribution,
    ket,
    product_state,
    bell_state,
    epr_state,
    born_probability,
    outcome_distribution,
    luders_update,
    bipartite_luders_update,
    nonselective_update,
    marginal_state,
)

from .quantum_algebra import (
    JointTable,
    conditional_probability,
    joint_distribution,
    is_separable_pure,
    compatible,
    joint_refinement,
    no_signaling_gap,
)

# Classical probability
from .prob_space import (
    FiniteProbSpace,
    RandomVariable,
    probability,
    distribution,
    condition_event,
    bayes_condition,
    nonselective_condition,
)

from .prob_space_algebra import (
    product_space,
    marginal,
    is_separable,
    conditional_probability_classical,
    total_probability_gap,
)

# Photon pairs
from .epr import (
    EPRScenario,
    polarizer_observable,
    epr_joint_probabilities,
    projected_state,
)

# Comparison and sampling
from .harness import ComparisonReport, two_step_vs_direct, classical_embedding, compare_embedding
from .sampling import SampleRun, sample_outcomes, conditional_statistics, band_check, homogeneity_test

# Joint distributions
from .jpd import BehaviorTable, chsh_value, jpd_feasible, behavior_from_quantum

# File formats
from .scenario_format import (
    ScenarioParser,
    ScenarioFormatter,
    BehaviorParser,
    BehaviorFormatter,
    parse_scenario,
    format_scenario,
    load_scenario,
    validate_scenario_syntax,
    parse_behavior,
    format_behavior,
    load_behavior,
)

from .tolerances import Tolerances, DEFAULT_TOLERANCES

__version__ = "0.1.0"

__all__ = [
    # Linear algebra
    "SpectralDecomposition",
    "spectral_decompose",
    "tensor_product",
    "partial_trace",
    "lift_to_site",
    "commutator",
    "trace_distance",

    # Quantum
    "Observable",
    "QuantumState",
    "OutcomeDistribution",
    "ket",
    "product_state",
    "bell_state",
    "epr_state",
    "born_probability",
    "outcome_distribution",
    "luders_update",
    "bipartite_luders_update",
    "nonselective_update",
    "marginal_state",
    "JointTable",
    "conditional_probability",
    "joint_distribution",
    "is_separable_pure",
    "compatible",
    "joint_refinement",
    "no_signaling_gap",

    # Classical
    "FiniteProbSpace",
    "RandomVariable",
    "probability",
    "distribution",
    "condition_event",
    "bayes_condition",
    "nonselective_condition",
    "product_space",
    "marginal",
    "is_separable",
    "conditional_probability_classical",
    "total_probability_gap",

    # Photon pairs
    "EPRScenario",
    "polarizer_observable",
    "epr_joint_probabilities",
    "projected_state",

    # Comparison and sampling
    "ComparisonReport",
    "two_step_vs_direct",
    "classical_embedding",
    "compare_embedding",
    "SampleRun",
    "sample_outcomes",
    "conditional_statistics",
    "band_check",
    "homogeneity_test",

    # Joint distributions
    "BehaviorTable",
    "chsh_value",
    "jpd_feasible",
    "behavior_from_quantum",

    # File formats
    "ScenarioParser",
    "ScenarioFormatter",
    "BehaviorParser",
    "BehaviorFormatter",
    "parse_scenario",
    "format_scenario",
    "load_scenario",
    "validate_scenario_syntax",
    "parse_behavior",
    "format_behavior",
    "load_behavior",

    "Tolerances",
    "DEFAULT_TOLERANCES",
]
