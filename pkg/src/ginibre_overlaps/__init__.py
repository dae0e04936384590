"""Overlap (eigenvalue condition number) statistics for Ginibre random matrices.

Exact finite-N joint densities of eigenvalues and eigenvector self-overlaps
for the real and complex Ginibre ensembles, their bulk/edge scaling limits,
determinant-ratio averages, and a reproducible Monte Carlo harness that
cross-validates the sampled matrices against the closed forms.
"""

__version__ = "0.1.0"

from . import (  # noqa: F401
    analytic_complex,
    analytic_real,
    cli,
    detratio,
    ensemble,
    mc_harness,
    quadrature,
    specfun,
)
from .errors import (  # noqa: F401
    DegenerateSampleError,
    DomainError,
    EmptyWindowError,
    InsufficientSamplesError,
    QuadratureConvergenceError,
)
