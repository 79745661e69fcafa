"""Geometric checks on rotation-domain boundaries."""

from .area import (
    DEEP_RADII,
    CenterNotInComponentError,
    DeepPointReport,
    ResolutionError,
    deep_point_from_mask,
    deep_point_grid,
    deep_point_test,
    excluded_areas,
    inner_outer_radius,
)
from .clouds import (
    BoundaryCloud,
    NotOnLocusError,
    boundary_cloud,
    cloud_diameter,
    julia_cloud,
    local_inverse,
)
from .scaling import (
    KappaResult,
    PeriodUnconfirmedError,
    best_limit,
    cauchy_gaps,
    closest_returns_P,
    closest_returns_f,
    kappa_from_displacements,
    scaling_factor,
    scaling_from_orbits,
    self_similar_clouds,
    self_similarity_kappa,
)
from .similarity import ScaleRangeError, SimilarityReport, tight_similarity_test
from .triangle import TriangleReport, triangle_probe
from ..dynamics import preimages

__all__ = [
    "BoundaryCloud",
    "CenterNotInComponentError",
    "DEEP_RADII",
    "DeepPointReport",
    "KappaResult",
    "NotOnLocusError",
    "PeriodUnconfirmedError",
    "ResolutionError",
    "ScaleRangeError",
    "SimilarityReport",
    "TriangleReport",
    "best_limit",
    "boundary_cloud",
    "cauchy_gaps",
    "closest_returns_P",
    "closest_returns_f",
    "cloud_diameter",
    "deep_point_from_mask",
    "deep_point_grid",
    "deep_point_test",
    "excluded_areas",
    "inner_outer_radius",
    "julia_cloud",
    "local_inverse",
    "kappa_from_displacements",
    "preimages",
    "scaling_factor",
    "scaling_from_orbits",
    "self_similar_clouds",
    "self_similarity_kappa",
    "tight_similarity_test",
    "triangle_probe",
]
