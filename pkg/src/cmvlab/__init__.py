"""Finite CMV matrices, rank-one unitary perturbations, and localization
experiments over random Verblunsky ensembles."""

from .cmv import (
    CmvMatrix,
    DomainError,
    VerblunskySeq,
    build_cmv,
    build_lm_factors,
    diag_pattern,
    scale_tail,
    theta_block,
)
from .ensembles import EnsembleSpec, SampleStream, sample
from .estimators import (
    DecayFit,
    DynLocEstimate,
    MomentEstimate,
    aizenman_inequality_check,
    dynamical_localization_expectation,
    fit_decay,
    fractional_moment_expectation,
    kolmogorov_report,
    run_theorem11_experiment,
)
from .perturbation import (
    ClarkCheckReport,
    RankOneFamily,
    clark_eigen_check,
    conjugation_residual,
    perturb,
    spectral_average_moments,
)
from .spectral import (
    QuadratureSpec,
    SpectralDecomposition,
    boundary_p_integral,
    caratheodory_boundary,
    caratheodory_element,
    eigendecompose_unitary,
    g_function,
    schur_oracle,
    schur_value,
)

__version__ = "0.1.0"
