"""Block-relaxation multidimensional scaling (PlaceCenter) for Euclidean and
spherical targets, with spherical random-projection tools."""

from .core import (
    MdsVariant,
    ConvergenceTrace,
    VARIANTS,
    check_distance_matrix,
    is_symmetric,
    parse_variant,
    point_cost,
    total_cost,
)
from .recenter import RecenterConfig
from .seeding import classical_mds_seed, spherical_seed
from .solver import SolverConfig, SolverResult, place, place_center, smacof_baseline

__all__ = [
    "MdsVariant",
    "ConvergenceTrace",
    "VARIANTS",
    "check_distance_matrix",
    "is_symmetric",
    "parse_variant",
    "point_cost",
    "total_cost",
    "RecenterConfig",
    "classical_mds_seed",
    "spherical_seed",
    "SolverConfig",
    "SolverResult",
    "place",
    "place_center",
    "smacof_baseline",
]

__version__ = "0.1.0"
