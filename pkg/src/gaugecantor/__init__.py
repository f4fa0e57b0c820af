"""Gauge-adapted random Cantor sets in the unit square and Monte Carlo checks of their projections."""
from .construction import Realization, SquareSet, build, contains, square_rect
from .deviance import deviant_fraction_exact, prune, pruning_levels, score
from .gauge import GaugeSpec, derive_schedule, divergence_report, regularize, validate_gauge
from .measure import mass_distribution_check, retained_mass
from .projection import (
    Line,
    count_intersected,
    favard_mc,
    fubini_check,
    hit_probability_exact,
    hit_probability_mc,
    line_hits_square,
    projection_length,
)

__all__ = [
    "GaugeSpec", "derive_schedule", "divergence_report", "regularize", "validate_gauge",
    "Realization", "SquareSet", "build", "contains", "square_rect",
    "deviant_fraction_exact", "prune", "pruning_levels", "score",
    "mass_distribution_check", "retained_mass",
    "Line", "count_intersected", "favard_mc", "fubini_check", "hit_probability_exact",
    "hit_probability_mc", "line_hits_square", "projection_length",
]
