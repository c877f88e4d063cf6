"""Exact dyadic arithmetic, the Hilbert-cube metric, torus metrics, Hausdorff distances."""

from .dyadic import HALF, ONE, ZERO, Dyadic, dmax, dmin
from .hilbert import (BoxContinuum, HilbertPoint, RadiusLaw, WeightedInterval, box_contains_point,
                      box_diam, box_hull, box_subset, boxes_intersect, hausdorff_box, hilbert_dist,
                      widest_coordinate)
from .torus import (TorusPoint, circle_dist, cloud_hausdorff, cover_sup_diam, torus_dist,
                    wrap_delta)

__all__ = [
    "Dyadic", "ZERO", "ONE", "HALF", "dmin", "dmax",
    "HilbertPoint", "RadiusLaw", "WeightedInterval", "BoxContinuum",
    "hilbert_dist", "box_diam", "hausdorff_box", "box_subset", "boxes_intersect",
    "box_contains_point", "box_hull", "widest_coordinate",
    "TorusPoint", "torus_dist", "circle_dist", "cover_sup_diam", "wrap_delta", "cloud_hausdorff",
]
