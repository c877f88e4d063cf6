"""First increasing times of balls, first-time sensitivity certificates,
local unstable continua and entropy bounds for a few model systems."""

from .certifier import certify, dyadic_schedule, monotone_mgamma, syndetic_gaps
from .continua import build_cw_unstable, check_backward_shrink, check_growth, shift_fu_closed_form
from .errors import FtsensError
from .firsttime import first_increase, uniform_bound
from .geometry import BoxContinuum, Dyadic, HilbertPoint, TorusPoint
from .hypmetric_entropy import chain_D, entropy_estimate, rho, split_tree
from .systems import CircleMap, ProductSystem, ShiftSystem, SlowedFlow, TorusLinear, cat_map

__version__ = "0.1.0"

__all__ = [
    "certify", "dyadic_schedule", "monotone_mgamma", "syndetic_gaps",
    "build_cw_unstable", "check_backward_shrink", "check_growth", "shift_fu_closed_form",
    "FtsensError", "first_increase", "uniform_bound",
    "BoxContinuum", "Dyadic", "HilbertPoint", "TorusPoint",
    "chain_D", "entropy_estimate", "rho", "split_tree",
    "CircleMap", "ProductSystem", "ShiftSystem", "SlowedFlow", "TorusLinear", "cat_map",
]
