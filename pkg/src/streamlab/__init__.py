"""Flow-level laboratory for video streaming traffic."""

from ._validation import ValidationError
from .analysis import StrategyClassifier, TraceReport, analyze, classify, segment_on_off
from .analytic import (ModelInputs, dimension_link, full_download_length_threshold,
                       interrupts_before_complete, mean_aggregate_rate, mean_wasted_rate,
                       variance_aggregate_rate)
from .domain import (Constant, DiscreteWeighted, StrategyConfig, StrategyKind, Uniform,
                     VideoParams, WorkloadSpec, make_rng, poisson_arrivals, sample)
from .presets import PRESETS, preset
from .scenario import dump_scenario, load_scenario
from .simulation import (AggregateTrafficSimulator, compare_strategies, simulate,
                         simulate_with_interruptions)
from .strategies import SessionTrace, build_trace, downloaded_by, segments_to_records, steady_rate

__version__ = "0.1.0"
