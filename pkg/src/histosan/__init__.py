"""Optimal and heuristic sanitization of location histograms."""

from .histogram import (
    JS,
    L2,
    SQEUCLID,
    BinDistance,
    Histogram,
    HistogramError,
    InfeasibleError,
    TargetHistogram,
    Taxonomy,
    align,
    distance,
    expand_sensitive,
    js_term,
    uniform_target,
)
from .report import SanitizationReport
from .slh import SlhInstance, lho_solve, proportional_baseline, slh_r_solve
from .tr import (
    AVOID,
    RESEMBLE,
    TrInstance,
    ah_solve,
    ao_solve,
    best_move,
    rh_solve,
    ro_solve,
)

__version__ = "0.1.0"
