"""Replicator dynamics for two-team zero-sum games with Boolean phenotypes."""

from .boolfn import (
    MAX_ARITY,
    BooleanFunction,
    ProductDistribution,
    conditional_pair,
    conditional_pairs,
    expectation,
    load_truth_table,
    make_builtin,
    parse_truth_table,
    save_truth_table,
)
from .dynamics import (
    IntegratorConfig,
    SystemState,
    Trajectory,
    integrate,
    integrate_subsystem,
    raw_field,
    rescaled_field,
    subsystem_field,
)
from .errors import (
    CapacityError,
    DomainError,
    InputError,
    IntegrationError,
    TeamRepError,
)
from .game import (
    PayoffKernel,
    TeamGame,
    conditional_agent_utilities,
    expected_team_utility,
    pure_utility,
    validate_kernel,
)
from .analysis import (
    CEReport,
    ChasingReport,
    FixedPointReport,
    PeriodEstimate,
    RateProfile,
    TimeAverages,
    certify_correlated_equilibrium,
    chasing_check,
    classify_fixed_point,
    closed_form_h_single_gene,
    detect_period,
    empirical_profile_distribution,
    hamiltonian,
    hamiltonian_values,
    output_rate,
    rate_profile,
    time_averages,
    weakly_stable_check,
)

__version__ = "0.1.0"

__all__ = [
    "MAX_ARITY",
    "BooleanFunction",
    "ProductDistribution",
    "conditional_pair",
    "conditional_pairs",
    "expectation",
    "load_truth_table",
    "make_builtin",
    "parse_truth_table",
    "save_truth_table",
    "IntegratorConfig",
    "SystemState",
    "Trajectory",
    "integrate",
    "integrate_subsystem",
    "raw_field",
    "rescaled_field",
    "subsystem_field",
    "CapacityError",
    "DomainError",
    "InputError",
    "IntegrationError",
    "TeamRepError",
    "PayoffKernel",
    "TeamGame",
    "conditional_agent_utilities",
    "expected_team_utility",
    "pure_utility",
    "validate_kernel",
    "CEReport",
    "ChasingReport",
    "FixedPointReport",
    "PeriodEstimate",
    "RateProfile",
    "TimeAverages",
    "certify_correlated_equilibrium",
    "chasing_check",
    "classify_fixed_point",
    "closed_form_h_single_gene",
    "detect_period",
    "empirical_profile_distribution",
    "hamiltonian",
    "hamiltonian_values",
    "output_rate",
    "rate_profile",
    "time_averages",
    "weakly_stable_check",
    "__version__",
]
