"""Quaternionic slice calculus and the fine structure of the Dirac operators.

The package evaluates slice hyperholomorphic functions and star products,
the polynomial families produced by ``D``, ``Dbar`` and ``Delta``, exact and
finite-difference actions of those operators, the associated Cauchy-type
kernels, series expansions with their convergence regions, and contour
integral representations.
"""

from .errors import (
    FinestructError,
    IllConditionedError,
    OutsideRegionError,
    OutsideRegionWarning,
    RealAxisError,
    SingularityError,
)

__version__ = "0.1.0"

__all__ = [
    "FinestructError",
    "IllConditionedError",
    "OutsideRegionError",
    "OutsideRegionWarning",
    "RealAxisError",
    "SingularityError",
    "__version__",
]
