"""Monte Carlo simulation and verification toolkit for the Laguerre and Jacobi Warren processes."""

from .errors import (
    DegenerateBandError,
    DomainError,
    ParameterError,
    PropagationError,
    ShapeError,
    StiffStepError,
    UsageError,
    ValidationError,
    WarrenError,
)
from .gt_core import (
    GTPattern,
    JacobiShape,
    LaguerreShape,
    LeftEdgeShape,
    SpectrumShape,
    gt_volume,
    validate_interlacing,
    vandermonde,
)
from .oracles import (
    RngStream,
    sample_gibbs_pattern,
    sample_jacobi_eigs,
    sample_multilevel_jacobi_eigs,
    sample_multilevel_wishart_eigs,
    sample_wishart_eigs,
)
from .sder_engine import (
    PathEnsemble,
    SimConfig,
    simulate_eigenvalue_sde,
    simulate_left_edge,
    simulate_warren,
)

__version__ = "0.1.0"

__all__ = [
    "DegenerateBandError",
    "DomainError",
    "GTPattern",
    "JacobiShape",
    "LaguerreShape",
    "LeftEdgeShape",
    "ParameterError",
    "PathEnsemble",
    "PropagationError",
    "RngStream",
    "ShapeError",
    "SimConfig",
    "SpectrumShape",
    "StiffStepError",
    "UsageError",
    "ValidationError",
    "WarrenError",
    "gt_volume",
    "sample_gibbs_pattern",
    "sample_jacobi_eigs",
    "sample_multilevel_jacobi_eigs",
    "sample_multilevel_wishart_eigs",
    "sample_wishart_eigs",
    "simulate_eigenvalue_sde",
    "simulate_left_edge",
    "simulate_warren",
    "validate_interlacing",
    "vandermonde",
]
