"""Bead-spring networks, OU-sum process models, and anomalous diffusion.

Build weighted spring graphs, take their diffusive spectra, assemble
OU-sum models of a distinguished particle, evaluate exact and limiting
mean-squared displacements, sample exact-in-law paths, and fit anomalous
exponents.
"""

from .analytic import (
    AsymptoticPrediction,
    DiracMeasure,
    MSDCurve,
    TightnessCheck,
    acf_finite,
    asymptotic_prediction,
    increment_variance,
    msd_finite,
    msd_limit,
    msd_limit_product,
    phi_laplace,
    tightness_bound_check,
    trace_msd,
)
from .errors import NumericFailureError, ResourceLimitError
from .estimate import (
    ExponentFit,
    ProfileCheck,
    Windows,
    default_windows,
    fit_exponent,
    log_growth_comparison,
    msd_from_ensemble,
    profile_check,
)
from .graph import (
    WeightedGraph,
    cartesian_product,
    circulant_chain,
    complete_graph,
    hypercube,
    repulsive_circulant,
    repulsive_weights,
    rouse_cycle,
    single_edge,
)
from .model import (
    CoefficientMeasure,
    SOUModel,
    coefficient_measure,
    distinguished_model,
    eigenvalue_level_measure,
    measure_convergence_diagnostic,
    pure_brownian_model,
    random_coefficient_model,
    random_string_model,
    sou_model,
)
from .simulate import (
    PathEnsemble,
    center_of_mass_paths,
    ensemble_msd,
    euler_full_network,
    sample_paths,
)
from .spectrum import (
    ShapeFunction,
    Spectrum,
    circulant_eigenvalues,
    circulant_shape,
    circulant_spectrum,
    complete_spectrum,
    eig_spectrum,
    estimate_rho,
    graph_spectrum,
    hypercube_spectrum,
    kronecker_sum_eigenvalues,
    linear_shape,
    power_law_eigenvalues,
    power_law_spectrum,
    power_shape,
    rouse_shape,
    shape_sup_distance,
)

__version__ = "0.1.0"
