"""Finite-dimensional projection lattices, symmetry groups and active lattices."""

__version__ = "0.1.0"

from .core import (  # noqa: E402
    DEFAULT_TOL,
    AlgebraShape,
    Element,
    SeededSampler,
    ToleranceConfig,
)
from .errors import (  # noqa: E402
    ActiveLatticeError,
    DomainError,
    NumericError,
    ReconstructionError,
    StructuralError,
)

__all__ = [
    "__version__",
    "DEFAULT_TOL",
    "AlgebraShape",
    "Element",
    "SeededSampler",
    "ToleranceConfig",
    "ActiveLatticeError",
    "DomainError",
    "NumericError",
    "ReconstructionError",
    "StructuralError",
]
