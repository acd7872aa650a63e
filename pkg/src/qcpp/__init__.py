"""Recovering pure quantum states from mixed-signal density matrices.

Detectors observe convex mixtures of a few unknown pure states.  Because
pure states are exactly the idempotent density matrices, a weighted
detector combination that minimizes ||rho^2 - rho||^2 lands on a source.
Two minimizers are provided: damped Newton iteration over real weights
summing to one, and simulated annealing over +/-1 weights after rewriting
the loss as a spin Hamiltonian (with a brute-force oracle for small
instances).  A separate real-vector check measures how the best +/-1
recombination error shrinks as signals accumulate.
"""

from .annealer import (
    AnnealConfig,
    AnnealReport,
    EpochTrace,
    anneal,
    metropolis_accept,
    propose_move,
    reconstruct_density,
    temperature_at_epoch,
)
from .errors import (
    ConstraintError,
    NonPhysicalStateError,
    QcppError,
    ScenarioFormatError,
    SizeCapError,
    ValidationError,
)
from .ising import (
    IsingCoefficients,
    SpinConfiguration,
    brute_force_ground_state,
    build_coefficients,
    energy,
    energy_from_coefficients,
    export_coefficients,
    sample_spin_configuration,
)
from .newton import (
    NewtonConfig,
    NewtonReport,
    WeightVector,
    loss,
    loss_gradient_hessian,
    match_to_sources,
    multi_restart,
    newton_solve,
    sample_initial_weights,
)
from .quantum_core import (
    DensityMatrix,
    PureState,
    fidelity,
    outer_product,
    purity,
    von_neumann_entropy,
)
from .scenario import (
    MixingMatrix,
    Scenario,
    generate_scenario,
    load_scenario,
    mix,
    sample_mixing_matrix,
    sample_pure_state,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)
from .statement import (
    StatementRow,
    StatementSummary,
    StatementSweepResult,
    VectorScenario,
    min_residual,
    sample_vector_scenario,
    statement_sweep,
)

__version__ = "0.1.0"

__all__ = [
    "AnnealConfig",
    "AnnealReport",
    "ConstraintError",
    "DensityMatrix",
    "EpochTrace",
    "IsingCoefficients",
    "MixingMatrix",
    "NewtonConfig",
    "NewtonReport",
    "NonPhysicalStateError",
    "PureState",
    "QcppError",
    "Scenario",
    "ScenarioFormatError",
    "SizeCapError",
    "SpinConfiguration",
    "StatementRow",
    "StatementSummary",
    "StatementSweepResult",
    "ValidationError",
    "VectorScenario",
    "WeightVector",
    "anneal",
    "brute_force_ground_state",
    "build_coefficients",
    "energy",
    "energy_from_coefficients",
    "export_coefficients",
    "fidelity",
    "generate_scenario",
    "load_scenario",
    "loss",
    "loss_gradient_hessian",
    "match_to_sources",
    "metropolis_accept",
    "min_residual",
    "mix",
    "multi_restart",
    "newton_solve",
    "outer_product",
    "propose_move",
    "purity",
    "reconstruct_density",
    "sample_initial_weights",
    "sample_mixing_matrix",
    "sample_pure_state",
    "sample_spin_configuration",
    "sample_vector_scenario",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "statement_sweep",
    "temperature_at_epoch",
    "von_neumann_entropy",
]
