"""Errors-in-variables regression toolkit.

Recovers the measurement-error characteristic function and the regression
function from conditional moments, provides the moment-condition machinery
for parametric spectrum models, and ships well-posedness diagnostics for
the underlying deconvolution.
"""

__version__ = "0.1.0"

from .exceptions import AssumptionViolation, EivError
from .numerics import (
    DeltaAtom,
    DeltaTrain,
    DiscreteDistribution,
    GeneralizedSpectrum,
    GridSpectrum,
    PiecewiseLinearFunction,
    RealGrid,
    StepFunction,
    antiderivative_from_zero,
    check_hermitian,
    derivative,
    pair,
)
from .weights import (
    Bump,
    Cut,
    IntervalMollified,
    PairBump,
    PolyBump,
    Product,
    Scaled,
    Shifted,
    eval_bump,
    eval_cut,
    make_interval_mollified,
    make_pair_bump,
    make_poly_bump,
)
from .spectral import (
    charfun_discrete,
    forward_ft_grid,
    ft_piecewise_linear,
    ft_step,
    inverse_ft_grid,
)
from .estimate import (
    DensityEstimate,
    Sample,
    bin_conditional_means,
    default_bin_count,
    moments_to_spectra,
    read_sample_csv,
    write_sample_csv,
)
from .deconv import (
    DeconvResult,
    RegularizationConfig,
    deconvolve,
    kappa_from_spectra,
    phi_from_kappa,
    run_pipeline,
)
from .diagnostics import CaseReport, classify, illposed_demo
from .semiparam import (
    Schedule,
    SpectralData,
    ThetaModel,
    build_gamma_matrices,
    build_model,
    empirical_spectra,
    eq_vector,
    gmm_solve,
    moment_ordinary_scale,
    moment_ordinary_shape,
    moment_singular_scale,
    moment_singular_shape,
    oracle_spectra,
    rank_check,
    registered_models,
)
from .simulate import DGP, ZSpec, default_dgp, draw, oracle_moments
