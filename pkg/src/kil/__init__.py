"""Kernel interpolation with Sobolev kernels: grid sets, Mercer power spaces,
density functions and empirical rate/smoothness correspondence."""
from .density import DensityField, apply_T_density, build_density, density_l2_norm
from .errors import (
    BelowPowerThreshold,
    DuplicateCenters,
    EmptyGrid,
    EvaluationFailure,
    IllConditioned,
    InsufficientData,
    KernelLabError,
    NotPositive,
    NumericalFailure,
    TooFewPoints,
    ZeroField,
)
from .geometry import (
    GeometrySummary,
    Region,
    fill_distance,
    grid_set,
    quadrature,
    separation_distance,
    uniformity,
)
from .interpolate import Interpolant, fit, interpolate, l2_error
from .kernels import Kernel, gram, min_eigenvalue
from .rates import RateFit, classify, fit_rate, make_target, refinement_study
from .spectral import (
    SpectralModel,
    apply_T,
    bernstein_constant,
    bernstein_ratio,
    check_generalized_reproducing,
    nystrom,
    power_kernel_eval,
    power_norm,
)

__version__ = "0.1.0"
