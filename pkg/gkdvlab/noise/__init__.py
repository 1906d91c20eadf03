"""Covariance operators, random streams and stochastic-convolution sampling"""
from .covariance import (
    CovarianceOperator,
    InvalidIncrementError,
    InvalidProfileError,
    NoiseError,
    default_covariance,
    hs_norm,
    required_sigma,
)
from .rng import RngStream, make_streams
from .sampling import (
    convolution_batch,
    convolution_path,
    convolution_step,
    draws_per_increment,
    increment_from_normals,
    sample_increment,
    sample_increment_coeffs,
)
