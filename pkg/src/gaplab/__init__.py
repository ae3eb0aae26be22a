"""Numerical laboratory for gradient blow-up between two nearly touching insulating balls.

The harmonic function outside two unit balls at distance ``2 eps`` (zero
flux on the balls, linear data far away) is reduced to a meridian problem
for one spherical-harmonic mode, solved in bispherical coordinates, and
post-processed into the quantities that control the gradient in the gap.
"""

from .errors import (
    ConfigurationError,
    ConvergenceError,
    DomainError,
    GapLabError,
    IndefiniteMatrixError,
    SweepFailure,
    VerificationError,
)
from .estimates import EstimateParams, choose_constants, gamma_star, rho
from .geometry import GapGeometry, MeridianGrid, build_grid, geometry_from_eps
from .linsolve import SolveReport, solve
from .meridian_pde import ModeSpec, assemble, dirichlet_mode_data

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError",
    "ConvergenceError",
    "DomainError",
    "EstimateParams",
    "GapGeometry",
    "GapLabError",
    "IndefiniteMatrixError",
    "MeridianGrid",
    "ModeSpec",
    "SolveReport",
    "SweepFailure",
    "VerificationError",
    "assemble",
    "build_grid",
    "choose_constants",
    "dirichlet_mode_data",
    "gamma_star",
    "geometry_from_eps",
    "rho",
    "solve",
    "__version__",
]
