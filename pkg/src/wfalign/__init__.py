"""Weight-feature alignment: rotation-invariant local reference frames for point clouds."""

__version__ = "0.1.0"

from .core import (
    PointCloud,
    validate_rotation,
    apply_rigid,
    NotOrthogonal,
    NotProper,
)
from .linalg3 import sym_eig3, svd3, det3, matmul3, outer_accumulate
from .neighbors import farthest_point_sample, radius_neighbors, knn, NeighborSet
from .wfa import (
    LayerWeights,
    WeightFrame,
    LocalFrame,
    AlignedNeighborhood,
    WFAConfig,
    weight_frame,
    local_frame,
    alignment_rotation,
    align_neighborhood,
    project_normals,
    wfa_feature_layer,
)
from .procrustes import (
    kabsch,
    nearest_correspondence,
    icp,
    brute_force_best_rotation,
    verify_theorem1,
)

__all__ = [
    "PointCloud",
    "validate_rotation",
    "apply_rigid",
    "NotOrthogonal",
    "NotProper",
    "sym_eig3",
    "svd3",
    "det3",
    "matmul3",
    "outer_accumulate",
    "farthest_point_sample",
    "radius_neighbors",
    "knn",
    "NeighborSet",
    "LayerWeights",
    "WeightFrame",
    "LocalFrame",
    "AlignedNeighborhood",
    "WFAConfig",
    "weight_frame",
    "local_frame",
    "alignment_rotation",
    "align_neighborhood",
    "project_normals",
    "wfa_feature_layer",
    "kabsch",
    "nearest_correspondence",
    "icp",
    "brute_force_best_rotation",
    "verify_theorem1",
]
