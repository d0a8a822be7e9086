"""Sequence obfuscation against pattern-matching de-anonymization.

Noise is injected into symbol traces so that any potentially identifying
pattern is likely to appear in many users' obfuscated sequences.  The
package provides covering-superstring constructions, data-independent and
data-dependent obfuscation engines, gap-constrained pattern detection,
closed-form privacy lower bounds, dataset ingestion, and a reproducible
Monte Carlo experiment harness.
"""

from .core import (
    Alphabet,
    Pattern,
    Permutation,
    RandomSource,
    Trace,
    anonymize,
    bernoulli,
)
from .superstring import (
    Superstring,
    concat_superstring,
    de_bruijn,
    shortest_superstring,
    verify_superstring,
)
from .detect import PatternStats, first_occurrence, has_pattern, update_stats
from .engines import (
    EngineConfig,
    lov_bound,
    lov_choose,
    manp_choose,
    obfuscate,
    plov_distribution,
    two_stage_obfuscate,
)
from .bounds import (
    BoundParams,
    Schedule,
    ScheduleParams,
    bound_sbu,
    bound_slsbu,
    expected_first_occurrence,
    schedule,
)
from .sim import (
    ExperimentResult,
    ExperimentSpec,
    insert_unique_pattern,
    run_first_occurrence_race,
    run_fraction,
    run_crowd_count,
    sweep,
)
from .ingest import RawTrace, encode, parse_csv, resample

__version__ = "0.1.0"

__all__ = [
    "Alphabet", "Pattern", "Permutation", "RandomSource", "Trace",
    "anonymize", "bernoulli",
    "Superstring", "concat_superstring", "de_bruijn",
    "shortest_superstring", "verify_superstring",
    "PatternStats", "first_occurrence", "has_pattern", "update_stats",
    "EngineConfig", "lov_bound", "lov_choose", "manp_choose", "obfuscate",
    "plov_distribution", "two_stage_obfuscate",
    "BoundParams", "Schedule", "ScheduleParams", "bound_sbu", "bound_slsbu",
    "expected_first_occurrence", "schedule",
    "ExperimentResult", "ExperimentSpec", "insert_unique_pattern",
    "run_first_occurrence_race", "run_fraction", "run_crowd_count", "sweep",
    "RawTrace", "encode", "parse_csv", "resample",
]
