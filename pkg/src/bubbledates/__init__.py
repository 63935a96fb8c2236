"""Confidence sets for the emergence, collapse, and recovery dates of
explosive episodes in time series, built by inverting break-location tests."""

from .confidence_sets import (
    ConfidenceSet,
    SetMetrics,
    build_set,
    build_sets,
    set_metrics,
)
from .critical_values import (
    CvBundle,
    ResponseSurface,
    TABLE1_SURFACES,
    chi2_cv,
    chi2_quantile_1df,
    eval_surface,
    fit_surface,
    simulate_cv,
)
from .collapse import CollapseStats, collapse_decision, collapse_stats
from .emergence import EmergenceStats, emergence_decision, emergence_stats
from .errors import (
    BubbleDatesError,
    DataError,
    DegenerateFitError,
    FitError,
    NumericOverflowError,
    ParameterError,
    RangeError,
)
from .estimation import RegimeFit, estimate_breaks, fit_regimes, sadf, sadf_critical_value
from .ingest import PriceRecord, ingest
from .model import BreakDates, BubbleDgpSpec, PrefixSums, Series, prefix_sums, simulate
from .montecarlo import CASES, McReport, McScenario, emit_tables, run_scenario
from .recovery import RecoveryStats, recovery_decision, recovery_stats

__version__ = "0.1.0"

__all__ = [
    "BreakDates",
    "BubbleDgpSpec",
    "BubbleDatesError",
    "CASES",
    "CollapseStats",
    "ConfidenceSet",
    "CvBundle",
    "DataError",
    "DegenerateFitError",
    "EmergenceStats",
    "FitError",
    "McReport",
    "McScenario",
    "NumericOverflowError",
    "ParameterError",
    "PrefixSums",
    "PriceRecord",
    "RangeError",
    "RecoveryStats",
    "RegimeFit",
    "ResponseSurface",
    "Series",
    "SetMetrics",
    "TABLE1_SURFACES",
    "build_set",
    "build_sets",
    "chi2_cv",
    "chi2_quantile_1df",
    "collapse_decision",
    "collapse_stats",
    "emergence_decision",
    "emergence_stats",
    "emit_tables",
    "estimate_breaks",
    "eval_surface",
    "fit_regimes",
    "fit_surface",
    "ingest",
    "prefix_sums",
    "recovery_decision",
    "recovery_stats",
    "run_scenario",
    "sadf",
    "sadf_critical_value",
    "set_metrics",
    "simulate",
    "simulate_cv",
]
