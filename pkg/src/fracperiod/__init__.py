"""Fractional-order difference maps: simulation, the period-2 stability
region of the two-periodic linear map, and asymptotic period-2 cycles."""

from fracperiod.cycles import (
    NoRealCycleError,
    PeriodTwoCycle,
    cubic_cycle_closed_form,
    locus,
    logistic_cycle_closed_form,
    parameter_window,
    solve_period2,
)
from fracperiod.kernel import FractionalOrder, InvalidOrderError, alternating_kernel_sum, kernel_table
from fracperiod.maps import MapSpec, builtin, evaluate, eval_with_derivative, linear_two_periodic, parse_map
from fracperiod.region import StabilityRegion, build_region, char_eq, classify_by_simulation, contains
from fracperiod.simulator import Trajectory, SplitTrajectory, iterate_direct, iterate_split

__version__ = "0.1.0"

__all__ = [
    "FractionalOrder", "InvalidOrderError", "MapSpec", "NoRealCycleError", "PeriodTwoCycle",
    "SplitTrajectory", "StabilityRegion", "Trajectory", "alternating_kernel_sum", "build_region",
    "builtin", "char_eq", "classify_by_simulation", "contains", "cubic_cycle_closed_form",
    "eval_with_derivative", "evaluate", "iterate_direct", "iterate_split", "kernel_table",
    "linear_two_periodic", "locus", "logistic_cycle_closed_form", "parameter_window",
    "parse_map", "solve_period2",
]
