"""Statistics of pattern occurrences as subsequences of random texts.

The package computes exact occurrence counts, exact and log-space
moments, the orthogonal (projection) decomposition of the normalized
count, seeded Monte Carlo experiments for the normal and log-normal
regimes, and the deletion-channel mutual-information identity.
"""

from .counting import CountValue, brute_force_count, constant_pattern_count, count_subsequences
from .decomposition import DecompositionReport, decompose, identity_checks, v_level
from .lognum import LogNum
from .moments import (
    MomentReport,
    alternating_tau,
    expected_count,
    expected_count_exact,
    moment_report,
    residual_bound,
    sigma1_sq,
    sigma1_sq_exact,
    xi_bound,
)
from .simulation import (
    ExperimentConfig,
    PatternSpec,
    SimSummary,
    lasn_consistency_check,
    run_lognormal_experiment,
    run_normal_experiment,
)
from .source_model import Alphabet, Pattern, SourceDist, Text, derive_seed, generate_text

__all__ = [
    "Alphabet",
    "CountValue",
    "DecompositionReport",
    "ExperimentConfig",
    "LogNum",
    "MomentReport",
    "Pattern",
    "PatternSpec",
    "SimSummary",
    "SourceDist",
    "Text",
    "alternating_tau",
    "brute_force_count",
    "constant_pattern_count",
    "count_subsequences",
    "decompose",
    "derive_seed",
    "expected_count",
    "expected_count_exact",
    "generate_text",
    "identity_checks",
    "lasn_consistency_check",
    "moment_report",
    "residual_bound",
    "run_lognormal_experiment",
    "run_normal_experiment",
    "sigma1_sq",
    "sigma1_sq_exact",
    "v_level",
    "xi_bound",
]

__version__ = "0.1.0"
