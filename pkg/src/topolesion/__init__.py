"""Topological features and filtration-based segmentation for lesion images."""

from .cubical import betti, label_components, threshold
from .curves import betti_curve, entropy_curve, pc_rgb, pc_xyz, persistence_curve
from .image_io import apply_mask, load_image, rgb_to_gray, rgb_to_xyz
from .persistence import (
    PersistenceDiagram,
    bottleneck_distance,
    essential_death_value,
    sublevel_persistence,
)
from .stats import ps_rgb, ps_vector, ps_xyz

__all__ = [
    "PersistenceDiagram",
    "apply_mask",
    "betti",
    "betti_curve",
    "bottleneck_distance",
    "entropy_curve",
    "essential_death_value",
    "label_components",
    "load_image",
    "pc_rgb",
    "pc_xyz",
    "persistence_curve",
    "ps_rgb",
    "ps_vector",
    "ps_xyz",
    "rgb_to_gray",
    "rgb_to_xyz",
    "sublevel_persistence",
    "threshold",
]
