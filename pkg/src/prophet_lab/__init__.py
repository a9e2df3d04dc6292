"""Two-phase optimal stopping: simulation, exact analysis, and bound optimization.

A process reveals 2n ranked items in uniformly random order, n per phase,
and a strategy may accept one item per phase, observing only relative ranks.
This package provides the reference process, the stopping strategies, their
finite-n and limit performance formulas, a deterministic Monte-Carlo engine,
an exhaustive small-n oracle, and golden-section optimization of the bounds.
"""

from .alpha import (
    ALPHA_AT_HALF,
    ALPHA_CEILING,
    AlphaEstimate,
    AlphaTable,
    Anchor,
    alpha_lower,
    default_table,
    estimate_alpha_by_simulation,
    load_alpha_table,
)
from .analytic import (
    adaptive_simpson,
    rpi_limit_perf,
    rpi_phase2_integrand,
    sec_accept_prob,
    secretary_limit_prob,
    sop_finite_prob,
    sop_limit_perf,
    stopping_time_pmf,
    tps_finite_prob,
    wai_finite_prob,
    wai_limit_prob,
)
from .engine import (
    ExactReport,
    SimulationReport,
    TuneResult,
    exhaustive,
    monte_carlo,
    stop_time_histogram,
    tune_schedule,
)
from .errors import ConfigurationError, InvalidParameterError, ProphetLabError
from .model import (
    ArrivalOrder,
    Instance,
    ProcessOutcome,
    RevealEvent,
    dirac_instance,
    draw_arrival_order,
    expected_phase_max,
    geometric_instance,
    load_instance,
    make_instance,
    prophet_value,
    run_two_phase,
    uniform_instance,
)
from .optimize import OptResult, lambda_sweep, maximize_concave, parse_grid
from .strategies import (
    PolicySpec,
    SingleThresholdFamily,
    TableScheduleFamily,
    ThresholdSchedule,
    ceil_frac,
    load_schedule_family,
    rpi_policy,
    sec_policy,
    sop_policy,
    tps_policy,
    wai_policy,
)

__version__ = "0.1.0"

__all__ = [
    "ALPHA_AT_HALF",
    "ALPHA_CEILING",
    "AlphaEstimate",
    "AlphaTable",
    "Anchor",
    "ArrivalOrder",
    "ConfigurationError",
    "ExactReport",
    "Instance",
    "InvalidParameterError",
    "OptResult",
    "PolicySpec",
    "ProcessOutcome",
    "ProphetLabError",
    "RevealEvent",
    "SimulationReport",
    "SingleThresholdFamily",
    "TableScheduleFamily",
    "ThresholdSchedule",
    "TuneResult",
    "adaptive_simpson",
    "alpha_lower",
    "ceil_frac",
    "default_table",
    "dirac_instance",
    "draw_arrival_order",
    "estimate_alpha_by_simulation",
    "exhaustive",
    "expected_phase_max",
    "geometric_instance",
    "lambda_sweep",
    "load_alpha_table",
    "load_instance",
    "load_schedule_family",
    "make_instance",
    "maximize_concave",
    "monte_carlo",
    "parse_grid",
    "prophet_value",
    "rpi_limit_perf",
    "rpi_phase2_integrand",
    "rpi_policy",
    "run_two_phase",
    "sec_accept_prob",
    "sec_policy",
    "secretary_limit_prob",
    "sop_finite_prob",
    "sop_limit_perf",
    "sop_policy",
    "stop_time_histogram",
    "stopping_time_pmf",
    "tps_finite_prob",
    "tps_policy",
    "tune_schedule",
    "uniform_instance",
    "wai_finite_prob",
    "wai_limit_prob",
    "wai_policy",
]
