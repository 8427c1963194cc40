"""slopemc: Monte Carlo reliability analysis of heterogeneous slopes.

Anisotropic log-normal random strength fields on a cell grid, a
circular-arc limit-equilibrium stability evaluator (numba-accelerated
with a pure-numpy fallback, see ``slopemc.accel``), seeded Monte Carlo
campaigns, and surrogate classifiers (random forest, RBF support-vector
classifier, dropout MLP) that predict the probability of failure from a
small simulated subset.
"""

from .accel import BACKEND
from .geometry import CellGrid, SlopeGeometry, build_grid
from .montecarlo import (
    CampaignError,
    Dataset,
    McConfig,
    PfEstimate,
    Sample,
    concat_datasets,
    estimate_pf,
    pf_cov,
    run_monte_carlo,
    subsample,
)
from .randfield import (
    FactorizationError,
    FieldRealization,
    FieldStatistics,
    build_covariance,
    cholesky_factor,
    derive_lognormal,
    empirical_stats,
    field_factor,
    realize_field,
)
from .stability import (
    InvalidCircleError,
    SearchSpaceError,
    SearchSpec,
    StabilityResult,
    TrialCircle,
    circle_fos,
    classify_stability,
    min_fos,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CampaignError",
    "CellGrid",
    "Dataset",
    "FactorizationError",
    "FieldRealization",
    "FieldStatistics",
    "InvalidCircleError",
    "McConfig",
    "PfEstimate",
    "Sample",
    "SearchSpaceError",
    "SearchSpec",
    "SlopeGeometry",
    "StabilityResult",
    "TrialCircle",
    "build_covariance",
    "build_grid",
    "cholesky_factor",
    "circle_fos",
    "classify_stability",
    "concat_datasets",
    "derive_lognormal",
    "empirical_stats",
    "estimate_pf",
    "field_factor",
    "min_fos",
    "pf_cov",
    "realize_field",
    "run_monte_carlo",
    "subsample",
]
