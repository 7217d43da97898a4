"""Derived views over traces: series, projections, and landscape slices."""

from .series import ProgressionResult, aggregate_group_series, progression_remaining
from .projection import PCABasis, ProjectionSet, PathCurve, ConfigCurve, pca_basis, path_evolution_projection
from .landscape import (
    FieldSpec,
    GridField,
    IsoBand,
    IsobandResult,
    PlaneSpec,
    TrajectoryOverlay,
    default_plane,
    feasibility_mask,
    isobands,
    default_levels,
    project_to_plane,
    resolve_functions,
    sample_grid,
    thickness,
    three_point_plane,
    trajectory_overlay,
)

__all__ = [
    "ProgressionResult", "aggregate_group_series", "progression_remaining",
    "PCABasis", "ProjectionSet", "PathCurve", "ConfigCurve", "pca_basis",
    "path_evolution_projection",
    "FieldSpec", "GridField", "IsoBand", "IsobandResult", "PlaneSpec",
    "TrajectoryOverlay", "default_plane", "feasibility_mask", "isobands",
    "default_levels", "project_to_plane", "resolve_functions", "sample_grid",
    "thickness", "three_point_plane", "trajectory_overlay",
]
