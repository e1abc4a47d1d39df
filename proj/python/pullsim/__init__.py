"""Age-of-information tools for pull-based replicated reads.

Closed forms, Monte Carlo simulation and bandit learners for choosing how
many server responses to wait for.
"""

from ._core import (
    Algorithm,
    BoundaryFlags,
    ImprovementRatios,
    OptimalK,
    ResponseDist,
    SystemParams,
    __version__,
    algorithms,
    boundary_aoi,
    boundary_utility,
    expected_aoi,
    expected_utility,
    expected_utility_general,
    harmonic,
    hyperexp_density,
    improvement_ratios,
    optimal_k_aoi,
    optimal_k_aoi_uniform,
    optimal_k_utility,
    reference_setup,
    run_bandit,
    run_experiment,
    run_sim,
)

__all__ = [
    "Algorithm",
    "BoundaryFlags",
    "ImprovementRatios",
    "OptimalK",
    "ResponseDist",
    "SystemParams",
    "__version__",
    "algorithms",
    "boundary_aoi",
    "boundary_utility",
    "expected_aoi",
    "expected_utility",
    "expected_utility_general",
    "harmonic",
    "hyperexp_density",
    "improvement_ratios",
    "optimal_k_aoi",
    "optimal_k_aoi_uniform",
    "optimal_k_utility",
    "reference_setup",
    "run_bandit",
    "run_experiment",
    "run_sim",
]
