"""Expected value of Wishart quadratic forms and the SGD noise model built on it."""
from ._rng import RngSeed
from .errors import (
    CaseMismatchError,
    ConfigError,
    DivergenceError,
    InvalidDimensionError,
    InvalidParameterError,
    NumericalFailureError,
    SizeCapError,
    WishartQBQError,
)
from .matgen import (
    SpdMatrix,
    eigendecompose,
    random_constrained_psd,
    random_spd,
    random_symmetric,
)
from .moments import (
    MomentResult,
    SpecialCase,
    build_commutation,
    empirical_qbq,
    expected_qbq,
    expected_qbq_eigen,
    expected_qbq_kronecker,
    expected_qbq_special,
    second_moment,
)
from .quadmodel import QuadraticModel, noise, noise_covariance, sample_function, stochastic_gradient, true_gradient
from .sgd import RunOutput, SgdConfig, TrajectoryRecord, run_asgd, run_sgd
from .wishart import WishartParams, WishartSample, sample_gaussian_vector, sample_wishart, transform_sample

__version__ = "0.1.0"
