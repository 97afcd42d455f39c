"""Monte Carlo experiments with exact-oracle comparisons."""

from .config import ExperimentConfig
from .runner import ExperimentReport, block_count_frequencies, compare_block_law, run_experiment
from .stats import (Z_ACCEPT, Z_DEFAULT, ConfidenceInterval, MeanEstimate, estimate_event_probability,
                    estimate_mean)
from .suites import SUITES, limsup_exact

__all__ = ["ExperimentConfig", "ExperimentReport", "run_experiment", "block_count_frequencies",
           "compare_block_law", "ConfidenceInterval", "MeanEstimate", "estimate_event_probability",
           "estimate_mean", "Z_ACCEPT", "Z_DEFAULT", "SUITES", "limsup_exact"]
