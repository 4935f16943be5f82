"""Genuine multipartite correlations and QFI in a boundary time crystal."""

from .dicke import (
    CollectiveOperators,
    ModelParams,
    build_collective_ops,
    element_magnitudes,
    embed_full_space,
    l1_coherence,
    purity,
    reduce_to_k,
    von_neumann_entropy,
)
from .dynamics import (
    IntegrationControls,
    IntegrationError,
    TrajectoryRecord,
    evolve,
    initial_state_minus_x,
    lindblad_rhs,
)
from .steady import NessSpec, build_eta, ness, ness_nullspace_oracle, trace_distance
from .correlations import (
    CorrelationSpectrum,
    correlation_spectrum,
    genuine_correlations,
    residual_correlations,
    total_correlations,
)
from .qfi import QfiResult, qfi_gamma, witness_depth
from .thermo import (
    correlator,
    inner_binomial_sum,
    normalization_D,
    thermo_gmc_per_spin,
    thermo_marginal,
    thermo_total_per_spin,
    trace_asymptotic,
    truncation_convergence,
)
from .fits import FitResult, fit_damped_oscillation, fit_exponential_approach, fit_power_law

__version__ = "0.1.0"
