"""Fractional integrals, maximal operators and Morrey norms on finite
metric measure spaces, with checkers for their weak- and strong-type
inequalities and a reproducible experiment harness."""

__version__ = "0.1.0"

from .functions import ExponentSet, lq_norm, morrey_norm, level_set_measure
from .operators import (
    KernelConvention,
    fractional_integral,
    hedberg_constant,
    hedberg_layer_sum,
    layer_radii,
    maximal,
)
from .space import (
    BallSpec,
    MetricMeasureSpace,
    ball_measure,
    ball_members,
    breakpoints,
    doubling_ratio,
    validate_space,
)

__all__ = [
    "BallSpec",
    "ExponentSet",
    "KernelConvention",
    "MetricMeasureSpace",
    "ball_measure",
    "ball_members",
    "breakpoints",
    "doubling_ratio",
    "fractional_integral",
    "hedberg_constant",
    "hedberg_layer_sum",
    "layer_radii",
    "level_set_measure",
    "lq_norm",
    "maximal",
    "morrey_norm",
    "validate_space",
]
