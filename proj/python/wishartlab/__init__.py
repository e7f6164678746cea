"""Wishart distributions and processes on the cone of psd matrices.

The heavy lifting lives in the compiled extension; this package re-exports
the functional API. Matrices are plain numpy arrays throughout.
"""

from ._core import (
    WishartError,
    classify,
    density,
    flow_pair,
    gindikin_contains,
    kalman_rank,
    laplace,
    mc_laplace,
    mean,
    omega_flow,
    sample,
    sigma_flow,
    simulate,
    transition_density,
    transition_density_exists,
    transition_laplace,
    zonal,
)

__all__ = [
    "WishartError",
    "classify",
    "density",
    "flow_pair",
    "gindikin_contains",
    "kalman_rank",
    "laplace",
    "mc_laplace",
    "mean",
    "omega_flow",
    "sample",
    "sigma_flow",
    "simulate",
    "transition_density",
    "transition_density_exists",
    "transition_laplace",
    "zonal",
]

__version__ = "0.1.0"
