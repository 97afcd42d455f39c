"""Random subsets of the positive integers built from independent coin flips.

``E_X = {k : X_k = 1}`` with ``P[X_k = 1] = p_k``.  The package samples such
sets, analyses single realizations, computes exact finite-range laws and
runs Monte Carlo suites that compare the two.
"""

from .analyzers import (APReport, BlockCounts, GapStats, LacunarityStats, ap_block_events, block_counts,
                        find_aps, floor_pow, gap_sequence, intersect_bounded_gap, lacunarity_stats)
from .convergence import (AdmissibilityReport, ConvergenceVerdict, block_integral, check_admissibility,
                          series_sum)
from .errors import BlockTooLargeError, ConfigError, NumericError
from .exact import (BlockLaw, block_count_distribution, block_empty_probability, expected_ap_count,
                    expected_block_events, expected_pair_coincidences, miss_probability)
from .profiles import AdmissibleFunction, ProbabilityProfile, load_profile, log_survival_at, prob_at
from .realization import Realization
from .rng import RngStream, derive_seed
from .sampler import sample, sample_naive, sample_skip, skip_oracle
from .sets import BoundedGapSet

__version__ = "0.1.0"

__all__ = [
    "APReport", "AdmissibilityReport", "AdmissibleFunction", "BlockCounts", "BlockLaw", "BlockTooLargeError",
    "BoundedGapSet", "ConfigError", "ConvergenceVerdict", "GapStats", "LacunarityStats", "NumericError",
    "ProbabilityProfile", "Realization", "RngStream", "ap_block_events", "block_count_distribution",
    "block_counts", "block_empty_probability", "block_integral", "check_admissibility", "derive_seed",
    "expected_ap_count", "expected_block_events", "expected_pair_coincidences", "find_aps", "floor_pow",
    "gap_sequence", "intersect_bounded_gap", "lacunarity_stats", "load_profile", "log_survival_at",
    "miss_probability", "prob_at", "sample", "sample_naive", "sample_skip", "series_sum", "skip_oracle",
]
